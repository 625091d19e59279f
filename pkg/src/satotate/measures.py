"""Sato-Tate and joint Sato-Tate measures.

The 1-D measure has density (1/pi) sqrt(1 - u^2/4) on [-2, 2]; its exact
antiderivative F drives every interval computation, so rectangles and tensor
products are closed-form.  Region measures are computed as certified
brackets: boxes (in the angle coordinates u = 2 cos t, v = 2 cos s, where the
density becomes (4/pi^2) sin^2 t sin^2 s and has no endpoint singularity) are
classified by interval arithmetic, undecided boxes are subdivided, and the
total undecided mass is an upper bound on the true error.  A per-cell
Gauss/root-isolation pass then polishes the returned value far below the
certificate without ever leaving the bracket.

Density constants: d_ell is the measure of {U_ell(u/2) > 0}; the positivity
density of a product of symmetric-power coefficients is

    d_{m,n} = d_m d_n + (1 - d_m)(1 - d_n)
            = 1/2                                   if m or n is odd,
              1/2 + (tan(pi/(m+1)) - pi/(m+1))
                    * (tan(pi/(n+1)) - pi/(n+1)) / (2 pi^2)   otherwise.

Note the even-even value for (2,2) is 0.5237610...; a sometimes-quoted
figure of 0.534 is inconsistent with both evaluation routes here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DomainError, InvariantError

_SLACK = 1e-12

#: flagged mismatch: the value occasionally quoted for the (2,2) density
SUSPECT_D22_QUOTE = 0.534


@dataclass(frozen=True)
class Interval:
    """A real interval; endpoints may be +-inf.  Openness is tracked but is
    irrelevant for the atomless measures here."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError(f"interval endpoints out of order: {self.lo} > {self.hi}")


@dataclass(frozen=True)
class MeasureValue:
    """A measure in [0,1] with a certified absolute error bound."""

    value: float
    abs_error: float = 0.0

    def __post_init__(self):
        if self.abs_error < 0:
            raise InvariantError("negative error bound")
        if self.value - self.abs_error < -_SLACK or self.value + self.abs_error > 1 + _SLACK:
            raise InvariantError(
                f"measure bracket [{self.value - self.abs_error}, "
                f"{self.value + self.abs_error}] escapes [0, 1]"
            )

    @property
    def lo(self):
        return self.value - self.abs_error

    @property
    def hi(self):
        return self.value + self.abs_error


def st_antiderivative(u):
    """F with F' the Sato-Tate density; F(-2) = -1/2, F(2) = 1/2.

    Accepts scalars or arrays; arguments are clipped to [-2, 2].
    """
    u_arr = np.clip(np.asarray(u, dtype=float), -2.0, 2.0)
    val = (0.5 * u_arr * np.sqrt(4.0 - u_arr**2) + 2.0 * np.arcsin(0.5 * u_arr)) / (2.0 * math.pi)
    return float(val) if val.shape == () else val


def mu_st(interval):
    """Sato-Tate measure of an interval (clipped to [-2, 2]); closed form."""
    lo = st_antiderivative(interval.lo)
    hi = st_antiderivative(interval.hi)
    return MeasureValue(max(0.0, hi - lo), 0.0)


def mu_jst_rect(i1, i2):
    """Joint measure of a rectangle: the product of the 1-D measures."""
    return MeasureValue(mu_st(i1).value * mu_st(i2).value, 0.0)


def _angle_mass(t):
    """Measure of {angle <= t} under (2/pi) sin^2; equals F(2) - F(2 cos t)."""
    return (t - 0.5 * np.sin(2.0 * t)) / math.pi


def _tan_gap(ell):
    # tan(pi/(ell+1)) - pi/(ell+1); exactly -pi at ell = 0
    if ell == 0:
        return -math.pi
    x = math.pi / (ell + 1)
    return math.tan(x) - x


def d_ell(ell):
    """Measure of {U_ell(u/2) > 0}: 1/2 for odd ell, else the tangent formula."""
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    if ell % 2 == 1:
        return 0.5
    return (ell + 2) / (2 * (ell + 1)) - math.tan(math.pi / (ell + 1)) / (2 * math.pi)


def d_mn(m, n):
    """Density of primes where the (m, n) symmetric-power product is positive.

    Zero indices are allowed (U_0 = 1 is positive everywhere, so the density
    degenerates to the single-index one), but (0, 0) is rejected.
    """
    if m == 0 and n == 0:
        raise DomainError("(m, n) = (0, 0) has no sign statistic")
    if m % 2 == 1 or n % 2 == 1:
        return 0.5
    return 0.5 + _tan_gap(m) * _tan_gap(n) / (2 * math.pi**2)


# -- certified region quadrature ------------------------------------------------

_MIN_TARGET = 1e-8
_MAX_DEPTH = 52
_MIN_WIDTH = 1e-13
_GL2_NODES = (-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0))


def mu_jst_region(region, target_abs_error, budget=10_000_000, polish=True):
    """Joint Sato-Tate measure of a polynomial region with a certified bracket.

    The region is partitioned into cells in the angle coordinates; every cell
    on which all constraints have definite interval-arithmetic sign is
    settled, the rest are subdivided until their total mass is below
    ``target_abs_error``.  The reported ``abs_error`` always dominates the
    distance from the returned value to the true measure.  Regions whose
    constraints are all univariate resolve through exact 1-D partitions
    (tight certificates); general boundaries additionally get a per-cell
    Gauss/root-counting estimate so the returned value is far more accurate
    than the certificate.

    Raises BudgetError if the subdivision budget (number of classified cells,
    default 10^7, None = unlimited) runs out before the target is met.
    """
    if target_abs_error < _MIN_TARGET:
        raise DomainError(f"target_abs_error must be >= {_MIN_TARGET}")
    if region.is_separable:
        return _tensor_bracket(region, target_abs_error)
    return _quadtree_bracket(region, target_abs_error, budget, polish)


def leaf_statuses(leaves, u_lo, u_hi, v_lo, v_hi):
    """Per-leaf sign statuses, evaluating each distinct polynomial once."""
    enclosures = {}
    statuses = []
    for leaf in leaves:
        enc = enclosures.get(leaf.poly)
        if enc is None:
            enc = leaf.poly.interval_enclosure_cells(u_lo, u_hi, v_lo, v_hi)
            enclosures[leaf.poly] = enc
        statuses.append(_direction_status(leaf.op, *enc))
    return statuses


def _leaf_status_1d(leaves, lo, hi, axis):
    if axis == "u":
        return leaf_statuses(leaves, lo, hi, 0.0, 0.0)
    return leaf_statuses(leaves, 0.0, 0.0, lo, hi)


def _direction_status(op, f_lo, f_hi):
    # +1 definitely satisfied, -1 definitely violated, 0 unknown; boundary
    # sets have measure zero so strict and non-strict ops classify alike
    if op in (">", ">="):
        return np.where(f_lo > 0, 1, np.where(f_hi < 0, -1, 0)).astype(np.int8)
    return np.where(f_hi < 0, 1, np.where(f_lo > 0, -1, 0)).astype(np.int8)


def _axis_partition(leaves, axis, target):
    """Certified 1-D partition of [-2, 2] for univariate constraints.

    Returns (lo, hi, statuses, undecided_mass) where statuses is one int8
    array per leaf and cells undecided for some leaf carry total ST-mass at
    most ``target`` (up to the float width floor).
    """
    lo = np.array([-2.0])
    hi = np.array([2.0])
    for _ in range(_MAX_DEPTH):
        statuses = _leaf_status_1d(leaves, lo, hi, axis)
        unknown = np.zeros(lo.shape, dtype=bool)
        for st in statuses:
            unknown |= st == 0
        mass = st_antiderivative(hi) - st_antiderivative(lo)
        und = float(mass[unknown].sum())
        splittable = unknown & (hi - lo > _MIN_WIDTH)
        if und <= target or not splittable.any():
            return lo, hi, statuses, und
        keep = ~splittable
        mid = 0.5 * (lo[splittable] + hi[splittable])
        lo = np.concatenate([lo[keep], lo[splittable], mid])
        hi = np.concatenate([hi[keep], mid, hi[splittable]])
    return lo, hi, statuses, und


def _tensor_bracket(region, target):
    u_idx = [i for i, ax in enumerate(region.leaf_axes()) if ax == "u"]
    v_idx = [i for i, ax in enumerate(region.leaf_axes()) if ax == "v"]
    leaves = region.leaves
    u_lo, u_hi, u_stat, _ = _axis_partition([leaves[i] for i in u_idx], "u", target / 4)
    v_lo, v_hi, v_stat, _ = _axis_partition([leaves[i] for i in v_idx], "v", target / 4)
    statuses = [None] * len(leaves)
    for pos, i in enumerate(u_idx):
        statuses[i] = u_stat[pos][:, None]
    for pos, i in enumerate(v_idx):
        statuses[i] = v_stat[pos][None, :]
    tree = region.tree_status(statuses, shape=(u_lo.size, v_lo.size))
    mu_u = st_antiderivative(u_hi) - st_antiderivative(u_lo)
    mu_v = st_antiderivative(v_hi) - st_antiderivative(v_lo)
    mass = mu_u[:, None] * mu_v[None, :]
    inside = float(mass[tree == 1].sum())
    und = float(mass[tree == 0].sum())
    return MeasureValue(min(1.0, inside + 0.5 * und), 0.5 * und)


def _quadtree_bracket(region, target, budget, polish):
    t1 = np.array([0.0])
    t2 = np.array([math.pi])
    s1 = np.array([0.0])
    s2 = np.array([math.pi])
    inside = 0.0
    processed = 0
    for _ in range(_MAX_DEPTH):
        # cells map to (u, v) boxes; cos is decreasing
        u_lo, u_hi = 2.0 * np.cos(t2), 2.0 * np.cos(t1)
        v_lo, v_hi = 2.0 * np.cos(s2), 2.0 * np.cos(s1)
        statuses = leaf_statuses(region.leaves, u_lo, u_hi, v_lo, v_hi)
        tree = region.tree_status(statuses)
        mass = (_angle_mass(t2) - _angle_mass(t1)) * (_angle_mass(s2) - _angle_mass(s1))
        processed += t1.size
        inside += float(mass[tree == 1].sum())
        unk = tree == 0
        und = float(mass[unk].sum())
        t1, t2, s1, s2 = t1[unk], t2[unk], s1[unk], s2[unk]
        wide = (t2 - t1 > _MIN_WIDTH) | (s2 - s1 > _MIN_WIDTH)
        if und <= target or not wide.any():
            break
        if budget is not None and processed + 4 * t1.size > budget:
            raise BudgetError(
                f"cell budget {budget} exhausted at certified error {und:.3e} "
                f"(target {target:.3e})"
            )
        tm, sm = 0.5 * (t1 + t2), 0.5 * (s1 + s2)
        t1 = np.concatenate([t1, tm, t1, tm])
        t2 = np.concatenate([tm, t2, tm, t2])
        s1 = np.concatenate([s1, s1, sm, sm])
        s2 = np.concatenate([sm, sm, s2, s2])
    estimate = _polish_cells(region, t1, t2, s1, s2) if (polish and t1.size) else 0.5 * und
    value = min(1.0, inside + min(estimate, und))
    abs_error = max(value - inside, inside + und - value) + 1e-15
    return MeasureValue(value, min(abs_error, 1.0))


def _real_roots_batched(coeff_rows):
    """Real roots of many dense v-polynomials (ascending coefficients).

    Returns a NaN-padded matrix of shape (rows, degree).  Rows are
    normalized and grouped by effective degree; degrees <= 2 use closed
    forms, higher ones batched companion eigenvalues.
    """
    rows = np.atleast_2d(np.asarray(coeff_rows, dtype=float))
    n, width = rows.shape
    scale = np.abs(rows).max(axis=1, keepdims=True)
    scale[scale == 0] = 1.0
    norm = rows / scale
    eff_deg = np.zeros(n, dtype=int)
    nz = np.abs(norm) > 1e-12
    for d in range(width):
        eff_deg[nz[:, d]] = d
    out = np.full((n, width - 1), np.nan)
    for d in np.unique(eff_deg):
        idx = np.flatnonzero(eff_deg == d)
        if d == 0:
            continue
        block = norm[idx, : d + 1]
        if d == 1:
            roots = (-block[:, 0] / block[:, 1])[:, None]
        elif d == 2:
            a, b, c = block[:, 2], block[:, 1], block[:, 0]
            disc = b * b - 4 * a * c
            ok = disc >= 0
            sq = np.sqrt(np.where(ok, disc, 0.0))
            r1 = np.where(ok, (-b - sq) / (2 * a), np.nan)
            r2 = np.where(ok, (-b + sq) / (2 * a), np.nan)
            roots = np.stack([r1, r2], axis=1)
        else:
            m = len(idx)
            comp = np.zeros((m, d, d))
            comp[:, 1:, :-1] = np.eye(d - 1)
            comp[:, :, -1] = -block[:, :d] / block[:, d : d + 1]
            ev = np.linalg.eigvals(comp)
            roots = np.where(np.abs(ev.imag) < 1e-9, ev.real, np.nan)
        out[idx, : roots.shape[1]] = roots
    return out


def _polish_cells(region, t1, t2, s1, s2):
    """High-order estimate of the member mass inside undecided cells.

    For Gauss nodes in the first angle, the cell section in the second
    coordinate is resolved exactly by polynomial root isolation, and the
    member sub-intervals are measured with the exact antiderivative.  Each
    cell estimate is clipped to [0, cell mass], so the overall value cannot
    leave the certified bracket.
    """
    half = 0.5 * (t2 - t1)
    mid = 0.5 * (t1 + t2)
    thetas = np.concatenate([mid + half * x for x in _GL2_NODES])
    u_nodes = 2.0 * np.cos(thetas)
    n_cells = t1.size
    root_blocks = []
    seen = set()
    for leaf in region.leaves:
        if leaf.poly in seen:
            continue
        seen.add(leaf.poly)
        if leaf.poly.degree_v() >= 1:
            root_blocks.append(_real_roots_batched(leaf.poly.v_coefficients_at(u_nodes)))
    v_lo = 2.0 * np.cos(np.concatenate([s2, s2]))[:, None]
    v_hi = 2.0 * np.cos(np.concatenate([s1, s1]))[:, None]
    if root_blocks:
        roots = np.concatenate(root_blocks, axis=1)
        roots = np.where((roots > v_lo) & (roots < v_hi), roots, np.nan)
        breaks = np.concatenate([v_lo, roots, v_hi], axis=1)
    else:
        breaks = np.concatenate([v_lo, v_hi], axis=1)
    breaks = np.sort(breaks, axis=1)  # NaNs sort to the end
    mids = 0.5 * (breaks[:, :-1] + breaks[:, 1:])
    valid = np.isfinite(mids)
    member = np.zeros(mids.shape, dtype=bool)
    if valid.any():
        u_mat = np.broadcast_to(u_nodes[:, None], mids.shape)
        member[valid] = region.contains_many(u_mat[valid], mids[valid])
    f = st_antiderivative(np.where(np.isfinite(breaks), breaks, 0.0))
    seg = f[:, 1:] - f[:, :-1]
    node_mass = np.where(valid & member, seg, 0.0).sum(axis=1)
    density = (2.0 / math.pi) * np.sin(thetas) ** 2
    weighted = density * node_mass
    cell_mass = (_angle_mass(t2) - _angle_mass(t1)) * (_angle_mass(s2) - _angle_mass(s1))
    estimates = half * (weighted[:n_cells] + weighted[n_cells:])
    return float(np.clip(estimates, 0.0, cell_mass).sum())
