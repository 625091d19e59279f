"""Chebyshev polynomials of the second kind and the symmetric-power lift.

U_m satisfies U_0 = 1, U_1 = 2u, U_{m+1} = 2u U_m - U_{m-1}, and
U_m(cos t) = sin((m+1)t)/sin t.  The normalized prime coefficient a(p) of a
newform lifts to its m-th symmetric power via a(p^m) = U_m(a(p)/2) whenever
p does not divide the level.

We also expose the monic integer variant S_m(u) = U_m(u/2), which satisfies
S_{m+1} = u S_m - S_{m-1}; composing with S keeps all coefficients integral,
which the region and counting machinery relies on for exact sign decisions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BadPrimeError, CapError

#: Degree cap keeping U_m coefficients comfortably inside exact 64-bit range
#: (the leading coefficient is 2^m).  Adjustable if a caller truly needs more.
DEGREE_CAP = 64


@dataclass(frozen=True)
class ChebyshevU:
    """Exact monomial coefficients of U_m, ascending powers."""

    degree: int
    coefficients: tuple

    def __call__(self, u):
        return eval_u(self.degree, u)


def _check_degree(m):
    if m < 0:
        raise CapError(f"degree must be nonnegative, got {m}")
    if m > DEGREE_CAP:
        raise CapError(f"degree {m} exceeds cap {DEGREE_CAP}")


def u_poly(m):
    """U_m in the monomial basis, computed by the three-term recurrence."""
    _check_degree(m)
    prev, cur = [1], [0, 2]
    if m == 0:
        return ChebyshevU(0, (1,))
    for _ in range(m - 1):
        nxt = [0] + [2 * c for c in cur]
        for k, c in enumerate(prev):
            nxt[k] -= c
        prev, cur = cur, nxt
    return ChebyshevU(m, tuple(cur))


def s_poly(m):
    """Monic integer coefficients of S_m(u) = U_m(u/2), ascending powers."""
    _check_degree(m)
    prev, cur = [1], [0, 1]
    if m == 0:
        return (1,)
    for _ in range(m - 1):
        nxt = [0] + list(cur)
        for k, c in enumerate(prev):
            nxt[k] -= c
        prev, cur = cur, nxt
    return tuple(cur)


def s_parity_split(m):
    """Split S_m(u) = u^parity * R(u^2); returns (parity, R coefficients).

    R has integer coefficients in ascending powers of u^2.  Used for exact
    sign decisions: with a = A / p^{(k-1)/2} the square a^2 is rational, so
    sign(S_m(a)) = sign(a)^parity * sign(R(a^2)) is exactly computable.
    """
    coeffs = s_poly(m)
    parity = m % 2
    return parity, tuple(coeffs[parity::2])


def eval_u(m, u):
    """Value of U_m at u via the forward recurrence (stable for m ~ 64).

    Accepts scalars or numpy arrays.
    """
    _check_degree(m)
    u_arr = np.asarray(u, dtype=float)
    prev = np.ones_like(u_arr)
    if m == 0:
        return float(prev) if prev.shape == () else prev
    cur = 2.0 * u_arr
    for _ in range(m - 1):
        prev, cur = cur, 2.0 * u_arr * cur - prev
    return float(cur) if cur.shape == () else cur


def eval_s_exact(m, a_squared, a_sign):
    """Exact sign of S_m(a) given the rational a^2 and sign of a in {-1,0,1}.

    Returns -1, 0, or +1.
    """
    parity, reduced = s_parity_split(m)
    val = Fraction(0)
    x = Fraction(a_squared)
    power = Fraction(1)
    for c in reduced:
        val += c * power
        power *= x
    r_sign = (val > 0) - (val < 0)
    if parity == 0:
        return r_sign
    return a_sign * r_sign


def sympower_coeff(table, p, m):
    """Coefficient a(p^m) = U_m(a(p)/2) of the m-th symmetric power at p.

    Only valid for p coprime to the level of the underlying form.
    """
    if table.descriptor.level % p == 0:
        raise BadPrimeError(
            f"p={p} divides level {table.descriptor.level}; the lift is undefined there"
        )
    ap = table.normalized_prime_value(p)
    return eval_u(m, ap / 2.0)
