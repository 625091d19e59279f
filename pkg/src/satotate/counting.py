"""Prime statistics for pairs of newforms.

Everything here counts primes p <= x with conditions on the normalized pair
(a(p), a'(p)) or its symmetric-power lifts a(p^m) = U_m(a(p)/2).  Primes
dividing either level are excluded from density statistics; the first
sign-change search offers both exclusion rules.

Sign decisions run in floating point with a guard band: whenever a value
lands within 1e-9 of a decision boundary the prime is re-examined exactly.
With A = A(p) integral and k even, every quantity of interest lies in
Q + Q*sqrt(p) (since a(p) = [A / p^{(k-2)/2}] / sqrt(p)), where signs and
zero tests are exact rational arithmetic, so no tie is ever binned silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bipoly import Poly2, compose_bivariate
from .chebyshev import eval_s_exact, eval_u, s_poly
from .errors import BudgetError, CoverageError, DomainError, InvariantError
from .measures import d_mn, mu_jst_region
from . import region as region_mod

_GUARD = 1e-9

CSV_COLUMNS = (
    "x",
    "pi_x",
    "count_pos",
    "count_neg",
    "count_zero",
    "emp_density",
    "pred_density",
    "envelope_ratio",
)


@dataclass(frozen=True)
class PrimeSieve:
    """All primes up to ``bound`` (Eratosthenes, exact)."""

    bound: int
    primes: np.ndarray

    def __post_init__(self):
        if self.bound >= 10 and int(np.searchsorted(self.primes, 10, "right")) != 4:
            raise InvariantError("sieve self-check failed at pi(10) = 4")
        if self.bound >= 100 and int(np.searchsorted(self.primes, 100, "right")) != 25:
            raise InvariantError("sieve self-check failed at pi(100) = 25")

    def count(self):
        return int(self.primes.size)

    def pi(self, x):
        return int(np.searchsorted(self.primes, x, side="right"))


def sieve(bound):
    """Primes <= bound; bounded at 10^8."""
    if bound > 10**8:
        raise BudgetError(f"sieve bound {bound} exceeds the 10^8 budget")
    if bound < 2:
        return PrimeSieve(bound, np.empty(0, dtype=np.int64))
    mask = np.ones(bound + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(bound**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return PrimeSieve(bound, np.flatnonzero(mask).astype(np.int64))


def default_checkpoints(x_max, count=20, x_min=1000):
    """Geometric checkpoint grid, deduplicated, ending exactly at x_max."""
    if x_max < 2:
        raise DomainError("x_max must be at least 2")
    x_min = min(x_min, x_max)
    pts = np.geomspace(x_min, x_max, count)
    xs = sorted({int(round(p)) for p in pts} | {int(x_max)})
    return xs


# -- exact radical arithmetic -----------------------------------------------------


def _exact_pair_value(W, p, A, k, A_prime, k_prime):
    """Value of W(a(p), a'(p)) written exactly as X + Y*sqrt(p).

    a(p) = A / p^{(k-1)/2} with k even, so every monomial contributes either
    a rational or a rational multiple of sqrt(p).
    """
    X = Fraction(0)
    Y = Fraction(0)
    for (i, j), c in W.coeffs.items():
        num = Fraction(c) * Fraction(A) ** i * Fraction(A_prime) ** j
        e = i * (k - 1) + j * (k_prime - 1)
        if e % 2 == 0:
            X += num / p ** (e // 2)
        else:
            Y += num / p ** ((e + 1) // 2)
    return X, Y


def _radical_sign(X, Y, p):
    """Exact sign of X + Y*sqrt(p) for rational X, Y and prime p."""
    if X == 0 and Y == 0:
        return 0
    if X >= 0 and Y >= 0:
        return 1
    if X <= 0 and Y <= 0:
        return -1
    lhs, rhs = X * X, Y * Y * p
    if lhs == rhs:
        raise InvariantError("sqrt(p) cannot be rational")
    if X > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


def exact_lift_sign(table, p, m):
    """Exact sign of a(p^m) = U_m(a(p)/2) at a prime p coprime to the level."""
    A = table.a_int(p)
    k = table.descriptor.weight
    a_sq = Fraction(A * A, p ** (k - 1))
    a_sign = (A > 0) - (A < 0)
    return eval_s_exact(m, a_sq, a_sign)


def _eligible_primes(table_f, table_fp, x):
    if table_f.bound < x or table_fp.bound < x:
        raise CoverageError(
            f"tables cover {table_f.bound} and {table_fp.bound}, need {x}"
        )
    primes = sieve(int(x)).primes
    NN = table_f.descriptor.level * table_fp.descriptor.level
    keep = np.array([NN % int(p) != 0 for p in primes])
    return primes[keep], primes


def _lift_signs(table, primes, m):
    """Float values and exact-guarded integer signs of a(p^m) over primes."""
    a = table.normalized_values(primes)
    vals = np.asarray(eval_u(m, a / 2.0))
    signs = np.sign(vals).astype(np.int64)
    for idx in np.flatnonzero(np.abs(vals) <= _GUARD):
        signs[idx] = exact_lift_sign(table, int(primes[idx]), m)
    return vals, signs


# -- reports -----------------------------------------------------------------------


@dataclass(frozen=True)
class CheckpointRow:
    x: int
    pi_x: int
    count_pos: int
    count_neg: int
    count_zero: int
    emp_density: float
    pred_density: float
    envelope_ratio: float


@dataclass(frozen=True)
class DensityReport:
    """Per-checkpoint empirical counts with predictions and envelope ratios.

    ``count_pos`` counts the tracked event (product positive, or dominance
    a(p^m) < a'(p^n)), ``count_neg`` the opposite strict comparison, and
    ``count_zero`` the exact ties; the three always sum to the number of
    eligible primes (p not dividing either level).
    """

    kind: str
    label_f: str
    label_fp: str
    m: int
    n: int
    exclusion: str
    region_desc: str
    rows: tuple

    def __post_init__(self):
        for row in self.rows:
            if not 0.0 <= row.emp_density <= 1.0:
                raise InvariantError(f"empirical density {row.emp_density} outside [0,1]")

    def final(self):
        return self.rows[-1]

    def to_csv(self):
        lines = [",".join(CSV_COLUMNS)]
        for r in self.rows:
            lines.append(
                f"{r.x},{r.pi_x},{r.count_pos},{r.count_neg},{r.count_zero},"
                f"{r.emp_density:.12g},{r.pred_density:.12g},{r.envelope_ratio:.12g}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def _cumulative(primes, flags, checkpoints):
    csum = np.concatenate([[0], np.cumsum(flags.astype(np.int64))])
    idx = np.searchsorted(primes, checkpoints, side="right")
    return csum[idx]


def _envelope_ratio_fn(table_f, table_fp, stat_region, mode="Unconditional12"):
    length, alpha, beta = stat_region.envelope_params()
    df, dfp = table_f.descriptor, table_fp.descriptor

    def ratio(x, pi_x):
        env = region_mod.error_envelope(
            mode, x, df.weight, dfp.weight, df.level, dfp.level, length, alpha, beta,
            pi_x=pi_x,
        )
        return env / pi_x

    return ratio


def _series_report(kind, table_f, table_fp, m, n, checkpoints, event_signs,
                   primes_all, eligible, pred, stat_region):
    ratio_fn = _envelope_ratio_fn(table_f, table_fp, stat_region)
    pos_c = _cumulative(eligible, event_signs > 0, checkpoints)
    neg_c = _cumulative(eligible, event_signs < 0, checkpoints)
    zero_c = _cumulative(eligible, event_signs == 0, checkpoints)
    rows = []
    for ci, x in enumerate(checkpoints):
        pi_x = int(np.searchsorted(primes_all, x, side="right"))
        n_eligible = int(pos_c[ci] + neg_c[ci] + zero_c[ci])
        emp = float(pos_c[ci] / n_eligible) if n_eligible else 0.0
        rows.append(
            CheckpointRow(
                x=int(x),
                pi_x=pi_x,
                count_pos=int(pos_c[ci]),
                count_neg=int(neg_c[ci]),
                count_zero=int(zero_c[ci]),
                emp_density=emp,
                pred_density=pred,
                envelope_ratio=ratio_fn(x, pi_x) if x >= 16 else float("inf"),
            )
        )
    return DensityReport(
        kind=kind,
        label_f=table_f.descriptor.label,
        label_fp=table_fp.descriptor.label,
        m=m,
        n=n,
        exclusion="ExcludeLevelPrimes",
        region_desc=stat_region.describe(),
        rows=tuple(rows),
    )


def sign_density_series(table_f, table_fp, m, n, checkpoints):
    """Counts of primes with a(p^m) a'(p^n) > 0 (and < 0, = 0) per checkpoint.

    The predicted density is the closed-form d_{m,n}; the envelope column is
    the ratio of the sharper unconditional envelope to pi(x).
    """
    if m == 0 and n == 0:
        raise DomainError("(m, n) = (0, 0) has no sign statistic")
    x_max = max(checkpoints)
    eligible, primes_all = _eligible_primes(table_f, table_fp, x_max)
    _, signs_m = _lift_signs(table_f, eligible, m)
    _, signs_n = _lift_signs(table_fp, eligible, n)
    product_signs = signs_m * signs_n
    stat_region = region_mod.sign_product(m, n)
    return _series_report(
        "sign", table_f, table_fp, m, n, list(checkpoints), product_signs,
        primes_all, eligible, d_mn(m, n), stat_region,
    )


def dominance_prediction(m, n, target_abs_error=1e-3):
    """Limiting density of {a(p^m) < a'(p^n)}.

    Equal indices or two odd indices give exactly 1/2 (swap/sign symmetry);
    otherwise the joint measure of {U_m(u/2) < U_n(v/2)} is computed by
    certified quadrature.
    """
    if m == n or (m % 2 == 1 and n % 2 == 1):
        return 0.5
    lt_region = region_mod.poly_positive(
        Poly2({(0, 1): 1, (1, 0): -1}), m, n
    )
    return mu_jst_region(lt_region, target_abs_error).value


def dominance_density_series(table_f, table_fp, m, n, checkpoints):
    """Counts of primes with a(p^m) < a'(p^n) per checkpoint."""
    if m == 0 and n == 0:
        raise DomainError("(m, n) = (0, 0) compares constants")
    x_max = max(checkpoints)
    eligible, primes_all = _eligible_primes(table_f, table_fp, x_max)
    vals_m, _ = _lift_signs(table_f, eligible, m)
    vals_n, _ = _lift_signs(table_fp, eligible, n)
    diff = vals_n - vals_m
    event = np.sign(diff).astype(np.int64)  # +1 means a(p^m) < a'(p^n)
    W = Poly2.from_univariate(s_poly(n), "v") - Poly2.from_univariate(s_poly(m), "u")
    kf = table_f.descriptor.weight
    kfp = table_fp.descriptor.weight
    for idx in np.flatnonzero(np.abs(diff) <= _GUARD):
        p = int(eligible[idx])
        X, Y = _exact_pair_value(W, p, table_f.a_int(p), kf, table_fp.a_int(p), kfp)
        event[idx] = _radical_sign(X, Y, p)
    stat_region = region_mod.poly_positive(Poly2({(0, 1): 1, (1, 0): -1}), m, n)
    return _series_report(
        "dominance", table_f, table_fp, m, n, list(checkpoints), event,
        primes_all, eligible, dominance_prediction(m, n), stat_region,
    )


# -- region counting ----------------------------------------------------------------


def count_in_region(table_f, table_fp, stat_region, x):
    """Exact count of primes p <= x, p coprime to both levels, whose
    normalized pair lies in the region.

    Membership is decided in floating point; any prime whose constraint
    value falls within 1e-9 of a boundary is re-decided with exact rational
    arithmetic in Q + Q*sqrt(p).
    """
    eligible, _ = _eligible_primes(table_f, table_fp, x)
    if eligible.size == 0:
        return 0
    a = table_f.normalized_values(eligible)
    ap = table_fp.normalized_values(eligible)
    statuses = []
    for leaf in stat_region.leaves:
        vals = np.asarray(leaf.poly.eval_float(a, ap))
        st = np.where(region_mod._holds_arr(leaf.op, vals), 1, -1).astype(np.int8)
        st[np.abs(vals) <= _GUARD] = 0
        statuses.append(st)
    tree = stat_region.tree_status(statuses, shape=eligible.shape)
    count = int((tree == 1).sum())
    kf = table_f.descriptor.weight
    kfp = table_fp.descriptor.weight
    for idx in np.flatnonzero(tree == 0):
        p = int(eligible[idx])
        exact_statuses = []
        for leaf in stat_region.leaves:
            X, Y = _exact_pair_value(leaf.poly, p, table_f.a_int(p), kf, table_fp.a_int(p), kfp)
            s = _radical_sign(X, Y, p)
            exact_statuses.append(np.int8(1 if leaf.holds(s) else -1))
        verdict = int(stat_region.tree_status([np.asarray(s) for s in exact_statuses], shape=()))
        count += verdict == 1
    return count


def zero_count(table_f, table_fp, P, m, n, x):
    """Primes p <= x (coprime to the levels) where P(a(p^m), a'(p^n)) = 0.

    Float hits within the guard band are confirmed by the exact radical
    representation, so the count has no false positives.
    """
    if P.is_constant():
        raise DomainError("P must be non-constant")
    W = compose_bivariate(P, list(s_poly(m)), list(s_poly(n)))
    eligible, _ = _eligible_primes(table_f, table_fp, x)
    if eligible.size == 0:
        return 0
    a = table_f.normalized_values(eligible)
    ap = table_fp.normalized_values(eligible)
    vals = np.asarray(W.eval_float(a, ap))
    kf = table_f.descriptor.weight
    kfp = table_fp.descriptor.weight
    count = 0
    for idx in np.flatnonzero(np.abs(vals) <= _GUARD):
        p = int(eligible[idx])
        X, Y = _exact_pair_value(W, p, table_f.a_int(p), kf, table_fp.a_int(p), kfp)
        count += X == 0 and Y == 0
    return count


# -- first sign change ---------------------------------------------------------------

EXCLUSION_RULES = ("AllPrimes", "ExcludeLevelPrimes")


@dataclass(frozen=True)
class FirstSignChange:
    """Search outcome; ``prime`` is None when no sign change was found."""

    prime: int | None
    searched_bound: int
    exclusion: str
    skipped: tuple = ()

    @property
    def found(self):
        return self.prime is not None


def first_sign_change(table_f, table_fp, m, n, exclusion="AllPrimes", search_bound=None):
    """Least prime with a(p^m) a'(p^n) < 0 under the chosen exclusion rule.

    With AllPrimes, ramified primes participate: the lift relation only
    covers p coprime to the level, so there the sign is read directly from
    the stored A(p^m) (such a prime is skipped, and recorded, if p^m exceeds
    the table bound).  Never raises on a fruitless search; returns a
    NotFound-style result carrying the searched bound.
    """
    if exclusion not in EXCLUSION_RULES:
        raise DomainError(f"unknown exclusion rule {exclusion!r}")
    bound = search_bound or min(table_f.bound, table_fp.bound)
    bound = min(bound, table_f.bound, table_fp.bound)
    primes = sieve(bound).primes
    Nf = table_f.descriptor.level
    Nfp = table_fp.descriptor.level
    skipped = []
    ramified = [int(p) for p in primes if (Nf * Nfp) % int(p) == 0]
    unramified = np.array([int(p) for p in primes if (Nf * Nfp) % int(p) != 0], dtype=np.int64)
    sign_at = {}
    if exclusion == "AllPrimes":
        for p in ramified:
            factors = []
            ok = True
            for table, N, mm in ((table_f, Nf, m), (table_fp, Nfp, n)):
                if N % p == 0:
                    if p**mm > table.bound:
                        ok = False
                        break
                    A = table.a_int(p**mm)
                    factors.append((A > 0) - (A < 0))
                else:
                    factors.append(exact_lift_sign(table, p, mm))
            if not ok:
                skipped.append(p)
                continue
            sign_at[p] = factors[0] * factors[1]
    if unramified.size:
        _, signs_m = _lift_signs(table_f, unramified, m)
        _, signs_n = _lift_signs(table_fp, unramified, n)
        prods = signs_m * signs_n
        for p, s in zip(unramified, prods):
            sign_at[int(p)] = int(s)
    for p in sorted(sign_at):
        if sign_at[p] < 0:
            return FirstSignChange(p, bound, exclusion, tuple(skipped))
    return FirstSignChange(None, bound, exclusion, tuple(skipped))


def theoretical_first_sign_bound(m, n, k, k_prime, level, level_prime, d):
    """Smallest x = 2^j with (1 - d_{m,n}) * sqrt(M(x)) > d.

    This is the doubling-grid solution of the inequality whose first success
    witnesses a sign change: past it, the guaranteed count of primes with a
    negative product is positive.  Returned as an exact integer power of two
    (the solution grows like exp(const * (log kk'NN')^2) and can exceed
    float range).
    """
    if d <= 0:
        raise DomainError("the envelope constant d must be positive")
    dmn = d_mn(m, n)
    if dmn >= 1:
        raise DomainError("d_{m,n} = 1 leaves no negative-sign density")
    K = k * k_prime * level * level_prime

    def satisfied(j):
        y = j * math.log(2.0)
        inner = K * y
        if inner <= 1:
            return False
        M = math.sqrt(math.sqrt(y) / math.log(inner))
        return (1.0 - dmn) * math.sqrt(M) > d

    lo_j, hi_j = 3, 4
    while not satisfied(hi_j):
        lo_j = hi_j
        hi_j *= 2
        if hi_j > 2**40:
            raise DomainError("no doubling checkpoint satisfies the inequality")
    while hi_j - lo_j > 1:
        mid = (lo_j + hi_j) // 2
        if satisfied(mid):
            hi_j = mid
        else:
            lo_j = mid
    return 2**hi_j


# -- polynomial symmetry detection ----------------------------------------------------


@dataclass(frozen=True)
class SymmetryClass:
    kind: str  # "odd_twist", "antisymmetric", or "none"
    s: int | None = None
    t: int | None = None

    @property
    def forces_half(self):
        return self.kind != "none"


def symmetry_class(P, m, n):
    """Detect sign symmetries of P forcing the positivity density to 1/2.

    Either some admissible reflection (s, t) with s in {(+-1)^m},
    t in {(+-1)^n} satisfies P(su, tv) = -P(u, v) while m or n is odd, or
    m = n and P is antisymmetric under swapping its arguments.  Both checks
    are exact coefficient comparisons.
    """
    if P.is_zero:
        raise DomainError("P must be nonzero")
    if m % 2 == 1 or n % 2 == 1:
        s_choices = (-1, 1) if m % 2 == 1 else (1,)
        t_choices = (-1, 1) if n % 2 == 1 else (1,)
        for s in s_choices:
            for t in t_choices:
                if (s, t) == (1, 1):
                    continue
                if P.sign_flip(s, t) == -P:
                    return SymmetryClass("odd_twist", s, t)
    if m == n and P.swap_vars() == -P:
        return SymmetryClass("antisymmetric")
    return SymmetryClass("none")
