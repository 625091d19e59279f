"""Independent oracles used to freeze expected values.

Everything here is deliberately naive (direct products, bisection plus
antiderivatives, Riemann sums, a segmented sieve) and shares no code with
the implementation paths it checks.
"""

import math

import numpy as np
from scipy.integrate import quad

#: classical coefficients of q * prod (1-q^n)^24 (weight-12, level-1 form)
TAU_REF = (1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920)


def naive_product_series(bound):
    """prod_{n=1..bound} (1 - q^n) by direct dense multiplication."""
    coeffs = [1] + [0] * bound
    for n in range(1, bound + 1):
        new = list(coeffs)
        for e in range(bound - n + 1):
            new[e + n] -= coeffs[e]
        coeffs = new
    return coeffs


def naive_eta_qexpansion(recipe, n_max):
    """Coefficients of q^0..q^n_max of the eta quotient, dense and direct."""
    v, rem = divmod(sum(d * e for d, e in recipe), 24)
    assert rem == 0
    length = n_max - v + 1
    series = [1] + [0] * (length - 1)

    def mul(a, b):
        out = [0] * length
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b[: length - i]):
                    if bj:
                        out[i + j] += ai * bj
        return out

    for d, e in recipe:
        base = [0] * length
        base[0] = 1
        for n in range(1, (length - 1) // d + 1):
            new = list(base)
            for idx in range(length - d * n):
                new[idx + d * n] -= base[idx]
            base = new
        for _ in range(e):
            series = mul(series, base)
    return [0] * v + series


def simpson_mu_st(a, b, n=200001):
    """Composite-Simpson integral of the 1-D density over [a, b]."""
    xs = np.linspace(a, b, n)
    ys = np.sqrt(np.clip(1.0 - xs**2 / 4.0, 0.0, None)) / math.pi
    h = (b - a) / (n - 1)
    return h / 3 * (ys[0] + ys[-1] + 4 * ys[1::2].sum() + 2 * ys[2:-1:2].sum())


def d_ell_quadrature(ell, eval_u):
    """Positivity mass of U_ell(cos t) under (2/pi) sin^2 t dt on [0, pi].

    Sign changes of the supplied evaluator are located by bisection, then
    each positive window is integrated with the sin^2 antiderivative.
    """

    def f(t):
        return eval_u(ell, math.cos(t))

    grid = np.linspace(1e-9, math.pi - 1e-9, 20 * (ell + 2))
    vals = np.array([f(t) for t in grid])
    roots = []
    for i in range(len(grid) - 1):
        if (vals[i] > 0) != (vals[i + 1] > 0):
            lo, hi = grid[i], grid[i + 1]
            flo = vals[i]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))
    pts = [0.0] + roots + [math.pi]

    def g(t):  # antiderivative of (2/pi) sin^2
        return (t - math.sin(t) * math.cos(t)) / math.pi

    total = 0.0
    for left, right in zip(pts[:-1], pts[1:]):
        if f(0.5 * (left + right)) > 0:
            total += g(right) - g(left)
    return total


def riemann_jst(contains, n=1500):
    """Midpoint Riemann sum of the joint measure of a membership predicate."""
    mids = -2.0 + (np.arange(n) + 0.5) * (4.0 / n)
    w = np.sqrt(np.clip(1.0 - mids**2 / 4.0, 0.0, None)) / math.pi * (4.0 / n)
    member = contains(mids[:, None], mids[None, :])
    return float((w[:, None] * w[None, :] * member).sum())


def disk_measure(radius=1.0):
    """Joint measure of {u^2 + v^2 < r^2} by 1-D section integration."""

    def f_st(u):
        u = min(2.0, max(-2.0, u))
        return (0.5 * u * math.sqrt(4 - u * u) + 2 * math.asin(u / 2)) / (2 * math.pi)

    def section(u):
        s = math.sqrt(max(0.0, radius**2 - u * u))
        rho = math.sqrt(max(0.0, 1 - u * u / 4)) / math.pi
        return rho * (f_st(s) - f_st(-s))

    val, _ = quad(section, -radius, radius, epsabs=1e-12, limit=300)
    return val


def segmented_sieve_count(bound, segment=10**5):
    """Prime count by an odd-only segmented sieve (independent of the
    package implementation)."""
    if bound < 2:
        return 0
    base_limit = int(math.isqrt(bound)) + 1
    is_p = np.ones(base_limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, int(base_limit**0.5) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    base = np.flatnonzero(is_p)
    count = 1  # the prime 2
    low = 3
    while low <= bound:
        high = min(low + 2 * segment, bound + 1)
        size = (high - low + 1) // 2
        mask = np.ones(size, dtype=bool)
        for p in base[1:]:
            p = int(p)
            if p * p >= high:
                break
            start = max(p * p, ((low + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start < high:
                mask[(start - low) // 2 :: p] = False
        count += int(mask.sum())
        low = high
    return count
