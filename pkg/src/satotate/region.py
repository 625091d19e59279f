"""Polynomial regions of [-2,2]^2 and the certified grid approximation.

A region is a conjunction/disjunction tree of polynomial sign constraints.
The grid engine partitions the square into m^2 boxes along lines at
-2 + 4*tau*i/m (tau slightly above 1 so that the boxes are marginally wider
than 4/m), classifies every box by interval arithmetic as interior/exterior/
boundary, and returns the measure bracket

    mu(S) <= mu(E) <= mu(S) + mu(T),

S the union of definitely-interior boxes and T the undecided ones.  The
boundary-box count N is compared against the explicit area bound
(m^2/4) (4 pi L delta + 8 pi alpha delta^2) with delta = 4 sqrt(2) tau / m,
and a strip-merge pass checks that each vertical strip of S splits into at
most 1 + alpha*beta rectangles, where alpha counts boundary curves and beta
bounds intersections of a boundary curve with a vertical line (for an
algebraic curve, its degree; vertical lines are exempt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import measures
from .bipoly import Poly2, compose_bivariate
from .chebyshev import s_poly
from .errors import (
    BudgetError,
    DegenerateError,
    DomainError,
    HypothesisError,
    InvariantError,
    ParseError,
    TraceError,
)

_OPS = (">", ">=", "<", "<=")
_OP_COMPLEMENT = {">": "<=", ">=": "<", "<": ">=", "<=": ">"}


@dataclass(frozen=True)
class Constraint:
    """A sign condition 'poly op 0' (any bound is folded into the polynomial)."""

    poly: Poly2
    op: str

    def __post_init__(self):
        if self.op not in _OPS:
            raise DomainError(f"unknown comparison {self.op!r}")
        if self.poly.is_zero:
            raise DegenerateError("constraint polynomial is identically zero")

    def holds(self, value):
        if self.op == ">":
            return value > 0
        if self.op == ">=":
            return value >= 0
        if self.op == "<":
            return value < 0
        return value <= 0


class PolynomialRegion:
    """A subset of [-2,2]^2 cut out by polynomial constraints.

    ``tree`` nodes are ("leaf", index), ("and", children) or ("or", children).
    """

    def __init__(self, constraints, tree=None, label="region"):
        self.leaves = tuple(constraints)
        if tree is None:
            tree = ("and", tuple(("leaf", i) for i in range(len(self.leaves))))
        self.tree = tree
        self.label = label
        self._axes = tuple(self._leaf_axis(c.poly) for c in self.leaves)
        self.is_separable = all(ax in ("u", "v") for ax in self._axes)
        # distinct boundary curves: one per distinct constraint polynomial
        curves = []
        for c in self.leaves:
            if c.poly not in curves:
                curves.append(c.poly)
        self.curves = tuple(curves)
        self.alpha = len(self.curves) + 4  # four square edges always counted
        beta = 1  # horizontal edges meet a vertical line once
        for poly in self.curves:
            if not poly.depends_on_v():
                continue  # components lie on vertical lines; exempt
            beta = max(beta, poly.total_degree())
        self.beta = beta
        self._trace_cache = None

    @staticmethod
    def _leaf_axis(poly):
        dep_u, dep_v = poly.depends_on_u(), poly.depends_on_v()
        if dep_u and dep_v:
            return "uv"
        return "v" if dep_v else "u"

    def leaf_axes(self):
        return self._axes

    # -- membership -------------------------------------------------------------

    def tree_status(self, statuses, shape=None):
        """Three-valued tree evaluation over broadcastable int8 status arrays."""
        if shape is None:
            if statuses:
                shape = np.broadcast(*statuses).shape if len(statuses) > 1 else statuses[0].shape
            else:
                shape = ()

        def rec(node):
            kind = node[0]
            if kind == "leaf":
                return np.broadcast_to(statuses[node[1]], shape)
            parts = [rec(child) for child in node[1]]
            if not parts:
                fill = 1 if kind == "and" else -1
                return np.full(shape, fill, dtype=np.int8)
            if kind == "and":
                neg = np.zeros(shape, dtype=bool)
                pos = np.ones(shape, dtype=bool)
                for p in parts:
                    neg |= p == -1
                    pos &= p == 1
                return np.where(neg, -1, np.where(pos, 1, 0)).astype(np.int8)
            pos = np.zeros(shape, dtype=bool)
            neg = np.ones(shape, dtype=bool)
            for p in parts:
                pos |= p == 1
                neg &= p == -1
            return np.where(pos, 1, np.where(neg, -1, 0)).astype(np.int8)

        return rec(self.tree)

    def contains_many(self, u, v):
        """Vectorized float membership (no guard band)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        statuses = []
        for leaf in self.leaves:
            val = leaf.poly.eval_float(u, v)
            statuses.append(np.where(leaf.holds(val) if np.isscalar(val) else _holds_arr(leaf.op, val), 1, -1).astype(np.int8))
        return self.tree_status(statuses, shape=np.broadcast(u, v).shape) == 1

    def contains(self, u, v, guard=0.0):
        """Membership of a single point; returns True/False, or None when a
        constraint value falls inside the guard band."""
        statuses = []
        for leaf in self.leaves:
            val = leaf.poly.eval_float(u, v)
            if abs(val) <= guard:
                statuses.append(np.int8(0))
            else:
                statuses.append(np.int8(1 if leaf.holds(val) else -1))
        out = int(self.tree_status([np.asarray(s) for s in statuses], shape=()))
        return None if out == 0 else out == 1

    def complement(self):
        """Region with the complementary membership (boundary excluded)."""

        def flip(node):
            if node[0] == "leaf":
                return node
            return ("or" if node[0] == "and" else "and", tuple(flip(c) for c in node[1]))

        flipped_leaves = tuple(Constraint(c.poly, _OP_COMPLEMENT[c.op]) for c in self.leaves)
        region = PolynomialRegion(flipped_leaves, flip(self.tree), label=f"not({self.label})")
        return region

    # -- boundary bookkeeping -----------------------------------------------------

    def traced_boundary(self):
        """(total constraint-curve length, component count), cached.

        Lengths are upper estimates from the adaptive polyline tracer; the
        four square edges are not included here.
        """
        if self._trace_cache is None:
            total, comps = 0.0, 0
            for poly in self.curves:
                length, ncomp = trace_boundary(poly)
                total += length
                comps += ncomp
            self._trace_cache = (total, comps)
        return self._trace_cache

    def envelope_params(self):
        """(L, alpha, beta) for the effective error envelopes; L includes the
        four square edges (total length 16)."""
        length, _ = self.traced_boundary()
        return (length + 16.0, self.alpha, self.beta)

    def describe(self):
        return self.label

    def __repr__(self):
        return f"PolynomialRegion({self.label!r}, leaves={len(self.leaves)})"


def _holds_arr(op, val):
    if op == ">":
        return val > 0
    if op == ">=":
        return val >= 0
    if op == "<":
        return val < 0
    return val <= 0


# -- constructors ---------------------------------------------------------------


def full_square():
    return PolynomialRegion((), ("and", ()), label="full-square")


def rect(u_lo, u_hi, v_lo, v_hi):
    """Axis-aligned rectangle [u_lo, u_hi] x [v_lo, v_hi]."""
    cons = []
    u = Poly2({(1, 0): 1})
    v = Poly2({(0, 1): 1})
    if u_lo > -2:
        cons.append(Constraint(u - Poly2.constant(Fraction(u_lo)), ">="))
    if u_hi < 2:
        cons.append(Constraint(u - Poly2.constant(Fraction(u_hi)), "<="))
    if v_lo > -2:
        cons.append(Constraint(v - Poly2.constant(Fraction(v_lo)), ">="))
    if v_hi < 2:
        cons.append(Constraint(v - Poly2.constant(Fraction(v_hi)), "<="))
    if not cons:
        return full_square()
    return PolynomialRegion(tuple(cons), label=f"rect[{u_lo},{u_hi}]x[{v_lo},{v_hi}]")


def half_plane_u_positive():
    return PolynomialRegion(
        (Constraint(Poly2({(1, 0): 1}), ">"),), label="u>0"
    )


def disk(radius=1):
    p = Poly2({(2, 0): 1, (0, 2): 1, (0, 0): -Fraction(radius) ** 2})
    return PolynomialRegion((Constraint(p, "<"),), label=f"disk(r={radius})")


def sign_product(m, n, sign=1):
    """Region where U_m(u/2) * U_n(v/2) has the requested sign.

    Built from univariate factors so the measure bracket can use exact 1-D
    partitions.  Index 0 contributes the constant factor 1 and is dropped.
    """
    if m == 0 and n == 0:
        raise DomainError("(m, n) = (0, 0) has constant sign")
    su = Poly2.from_univariate(s_poly(m), "u") if m > 0 else None
    sv = Poly2.from_univariate(s_poly(n), "v") if n > 0 else None
    tag = "+" if sign > 0 else "-"
    label = f"sign[{m},{n}]{tag}"
    if su is None or sv is None:
        poly = sv if su is None else su
        return PolynomialRegion(
            (Constraint(poly, ">" if sign > 0 else "<"),), label=label
        )
    if sign > 0:
        cons = (
            Constraint(su, ">"),
            Constraint(sv, ">"),
            Constraint(su, "<"),
            Constraint(sv, "<"),
        )
    else:
        cons = (
            Constraint(su, ">"),
            Constraint(sv, "<"),
            Constraint(su, "<"),
            Constraint(sv, ">"),
        )
    tree = (
        "or",
        (
            ("and", (("leaf", 0), ("leaf", 1))),
            ("and", (("leaf", 2), ("leaf", 3))),
        ),
    )
    return PolynomialRegion(cons, tree, label=label)


def region_from_poly_interval(P, interval, m, n):
    """The region {(u,v) : P(U_m(u/2), U_n(v/2)) in I}.

    P is a Poly2 in the lifted coordinates; the composition with the monic
    integer polynomials S_m, S_n is exact, and the resulting degree feeds the
    vertical-line intersection bound beta.
    """
    if P.is_constant():
        raise DomainError("P must be non-constant")
    if m == 0 and n == 0:
        raise DomainError("(m, n) = (0, 0) is not allowed")
    composed = compose_bivariate(P, list(s_poly(m)), list(s_poly(n)))
    if composed.is_constant():
        raise DomainError("composed polynomial is constant on the square")
    cons = []
    if math.isfinite(interval.lo):
        cons.append(
            Constraint(
                composed - Poly2.constant(Fraction(interval.lo)),
                ">=" if interval.lo_closed else ">",
            )
        )
    if math.isfinite(interval.hi):
        cons.append(
            Constraint(
                composed - Poly2.constant(Fraction(interval.hi)),
                "<=" if interval.hi_closed else "<",
            )
        )
    if not cons:
        return full_square()
    return PolynomialRegion(
        tuple(cons), label=f"poly-interval[{interval.lo},{interval.hi}]({m},{n})"
    )


def _sympy_factors(poly):
    """Exact irreducible factorization of a Poly2 over the rationals.

    Returns (constant_sign, [(factor_poly2, multiplicity), ...]).
    """
    import sympy

    u_sym, v_sym = sympy.symbols("u v")
    expr = sympy.Integer(0)
    for (i, j), c in poly.coeffs.items():
        expr += sympy.Rational(Fraction(c)) * u_sym**i * v_sym**j
    const, factors = sympy.factor_list(expr, u_sym, v_sym)
    out = []
    for f, mult in factors:
        sp = sympy.Poly(f, u_sym, v_sym)
        coeffs = {}
        for (i, j), c in sp.terms():
            coeffs[(i, j)] = Fraction(int(c.p), int(c.q))
        out.append((Poly2(coeffs), int(mult)))
    csign = 1 if const > 0 else -1
    return csign, out


def _sign_pattern_tree(factor_polys, target_sign, strict):
    """Or/And tree selecting sign vectors whose product matches target_sign."""
    k = len(factor_polys)
    pos_op = ">" if strict else ">="
    neg_op = "<" if strict else "<="
    constraints = []
    branches = []
    for bits in range(1 << k):
        signs = [1 if (bits >> t) & 1 == 0 else -1 for t in range(k)]
        prod = 1
        for s in signs:
            prod *= s
        if prod != target_sign:
            continue
        leaf_ids = []
        for poly, s in zip(factor_polys, signs):
            constraints.append(Constraint(poly, pos_op if s > 0 else neg_op))
            leaf_ids.append(len(constraints) - 1)
        branches.append(("and", tuple(("leaf", i) for i in leaf_ids)))
    return tuple(constraints), ("or", tuple(branches))


def poly_positive(P, m, n, sign=1):
    """Positivity (or negativity) set of P(U_m(u/2), U_n(v/2)).

    When the composed polynomial factors as A(u)*B(v) the region is built
    from the univariate factors (exact tensor brackets).  Otherwise it is
    split into irreducible factors and the sign condition becomes an Or over
    admissible factor-sign patterns: interval arithmetic certifies each
    factor near its own zero set far faster than the expanded product, whose
    enclosures degenerate wherever several factors vanish together.  Factors
    of even multiplicity cannot change the sign off a measure-zero set and
    are dropped from the tree.
    """
    if P.is_constant():
        raise DomainError("P must be non-constant")
    composed = compose_bivariate(P, list(s_poly(m)), list(s_poly(n)))
    if composed.is_constant():
        raise DomainError("composed polynomial is constant on the square")
    op = ">" if sign > 0 else "<"
    label = f"poly{op}0({m},{n})"
    factors = composed.rank_one_factors()
    if factors is not None:
        a_coeffs, b_coeffs = factors
        pa = Poly2.from_univariate(a_coeffs, "u")
        pb = Poly2.from_univariate(b_coeffs, "v")
        if not (pa.is_constant() or pb.is_constant()):
            if sign > 0:
                cons = (
                    Constraint(pa, ">"),
                    Constraint(pb, ">"),
                    Constraint(pa, "<"),
                    Constraint(pb, "<"),
                )
            else:
                cons = (
                    Constraint(pa, ">"),
                    Constraint(pb, "<"),
                    Constraint(pa, "<"),
                    Constraint(pb, ">"),
                )
            tree = (
                "or",
                (
                    ("and", (("leaf", 0), ("leaf", 1))),
                    ("and", (("leaf", 2), ("leaf", 3))),
                ),
            )
            return PolynomialRegion(cons, tree, label=label)
    csign, parts = _sympy_factors(composed)
    odd = [poly for poly, mult in parts if mult % 2 == 1]
    target = (1 if sign > 0 else -1) * csign
    if not odd:
        # a.e. constant sign: the region is the full square or a null set
        if target > 0:
            return full_square()
        return PolynomialRegion(
            (Constraint(composed, op),), ("or", ()), label=label
        )
    cons, tree = _sign_pattern_tree(odd, target, strict=True)
    return PolynomialRegion(cons, tree, label=label)


# -- grid ------------------------------------------------------------------------


@dataclass(frozen=True)
class GridLines:
    """The m+1 grid lines per axis: -2 + 4*tau*i/m for i < m, closed by +2."""

    m: int
    tau: float
    edges: np.ndarray = field(repr=False)

    def box_index(self, x):
        """Half-open assignment [lower, upper); the last box is closed at 2."""
        i = int(np.searchsorted(self.edges, x, side="right")) - 1
        return min(max(i, 0), self.m - 1)


def build_grid(m):
    """Grid lines with tau = 1 + 1/(2*sqrt(2)*m), inside (1, 1 + 1/(2m)).

    Points landing exactly on an interior line belong to the upper box
    (half-open rule); the closing line sits exactly at +2.
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    tau = 1.0 + 1.0 / (2.0 * math.sqrt(2.0) * m)
    edges = np.empty(m + 1)
    edges[:m] = -2.0 + 4.0 * tau * np.arange(m) / m
    edges[m] = 2.0
    if not np.all(np.diff(edges) > 0):
        raise InvariantError("grid edges are not strictly increasing")
    return GridLines(m, tau, edges)


@dataclass(frozen=True)
class GridApproximation:
    """Box classification of a region on the m x m grid.

    ``status[i, j]`` covers the box [edges[i], edges[i+1]] x [edges[j],
    edges[j+1]] and holds +1 (interior), -1 (exterior) or 0 (boundary).
    """

    region: PolynomialRegion
    grid: GridLines
    status: np.ndarray = field(repr=False)
    mu_low: float
    mu_high: float
    boundary_count: int

    @property
    def m(self):
        return self.grid.m

    @property
    def tau(self):
        return self.grid.tau

    @property
    def bracket(self):
        return (self.mu_low, self.mu_high)

    @property
    def interior_boxes(self):
        return {tuple(ij) for ij in np.argwhere(self.status == 1)}

    @property
    def boundary_boxes(self):
        return {tuple(ij) for ij in np.argwhere(self.status == 0)}

    def exterior_mass(self):
        grid_mu = _box_mass(self.grid)
        return float(grid_mu[self.status == -1].sum())


def _box_mass(grid):
    f = measures.st_antiderivative(grid.edges)
    d = np.diff(f)
    return d[:, None] * d[None, :]


def classify_boxes(region, m):
    """Classify every grid box by rigorous interval sign analysis.

    Interval arithmetic is conservative, so definitely-interior boxes lie in
    the region's interior and every box meeting the boundary lands in the
    boundary set; the resulting bracket encloses the true measure.
    """
    if m > 4096:
        raise BudgetError(f"grid resolution {m} exceeds the 4096 budget")
    for c in region.leaves:
        if c.poly.is_zero:
            raise DegenerateError("constraint polynomial is identically zero")
    grid = build_grid(m)
    enclosures = {}
    statuses = []
    for leaf in region.leaves:
        enc = enclosures.get(leaf.poly)
        if enc is None:
            enc = leaf.poly.interval_eval_grid(grid.edges, grid.edges)
            enclosures[leaf.poly] = enc
        statuses.append(measures._direction_status(leaf.op, *enc))
    tree = region.tree_status(statuses, shape=(m, m))
    mass = _box_mass(grid)
    mu_low = float(mass[tree == 1].sum())
    mu_boundary = float(mass[tree == 0].sum())
    return GridApproximation(
        region=region,
        grid=grid,
        status=tree,
        mu_low=mu_low,
        mu_high=min(1.0, mu_low + mu_boundary),
        boundary_count=int((tree == 0).sum()),
    )


def boundary_bound_check(region, m, approx=None):
    """Observed boundary-box count against the explicit area bound.

    The bound is (m^2/4) * (4 pi L delta + 8 pi alpha delta^2) with delta the
    box diameter bound 4 sqrt(2) tau / m, L the traced total length of the
    constraint curves and alpha their component count.  Raises InvariantError
    if the observed count exceeds it.
    """
    if approx is None:
        approx = classify_boxes(region, m)
    length, comps = region.traced_boundary()
    delta = 4.0 * math.sqrt(2.0) * approx.tau / m
    bound = (m**2 / 4.0) * (4.0 * math.pi * length * delta + 8.0 * math.pi * comps * delta**2)
    n_obs = approx.boundary_count
    if n_obs > bound:
        raise InvariantError(
            f"boundary-box count {n_obs} exceeds the area bound {bound:.1f} at m={m}"
        )
    return n_obs, bound


@dataclass(frozen=True)
class StripMerge:
    """Maximal interior rectangles per vertical strip."""

    rectangles: tuple
    per_strip_counts: np.ndarray
    alpha: int
    beta: int


def strip_merge(region, m, approx=None):
    """Merge vertically adjacent interior boxes within each vertical strip.

    Each strip contributes at most 1 + alpha*beta rectangles (a boundary
    curve either lies on a vertical line or crosses a vertical line at most
    beta times); violation raises HypothesisError.
    """
    if approx is None:
        approx = classify_boxes(region, m)
    edges = approx.grid.edges
    alpha, beta = region.alpha, region.beta
    cap = 1 + alpha * beta
    rectangles = []
    counts = np.zeros(m, dtype=int)
    for i in range(m):
        column = approx.status[i] == 1
        j = 0
        while j < m:
            if column[j]:
                j0 = j
                while j < m and column[j]:
                    j += 1
                rectangles.append(((edges[i], edges[i + 1]), (edges[j0], edges[j])))
                counts[i] += 1
            else:
                j += 1
        if counts[i] > cap:
            raise HypothesisError(
                f"strip {i} splits into {counts[i]} components, above 1+alpha*beta={cap}"
            )
    return StripMerge(tuple(rectangles), counts, alpha, beta)


# -- boundary curve tracing --------------------------------------------------------


def _univariate_line_trace(poly):
    axis = "u" if poly.depends_on_u() else "v"
    coeffs = [0.0] * (poly.degree_u() + 1 if axis == "u" else poly.degree_v() + 1)
    for (i, j), c in poly.coeffs.items():
        coeffs[i if axis == "u" else j] = float(c)
    roots = np.roots(coeffs[::-1]) if len(coeffs) > 1 else np.empty(0)
    real = sorted({round(float(r.real), 12) for r in roots if abs(r.imag) < 1e-9 and -2 <= r.real <= 2})
    return 4.0 * len(real), len(real)


def _marching_polylines(poly, grid_n):
    xs = np.linspace(-2.0, 2.0, grid_n + 1)
    vals = poly.eval_float(xs[:, None], xs[None, :])
    sgn = np.where(vals >= 0, 1, -1)

    def interp(p, q, fp, fq):
        t = fp / (fp - fq)
        return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))

    # edge id -> crossing point
    points = {}

    def edge_point(axis, i, j):
        key = (axis, i, j)
        if key in points:
            return key
        if axis == "u":
            p, q = (xs[i], xs[j]), (xs[i + 1], xs[j])
            fp, fq = vals[i, j], vals[i + 1, j]
        else:
            p, q = (xs[i], xs[j]), (xs[i], xs[j + 1])
            fp, fq = vals[i, j], vals[i, j + 1]
        points[key] = interp(p, q, fp, fq)
        return key

    adjacency = {}

    def connect(a, b):
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)

    for i in range(grid_n):
        for j in range(grid_n):
            s00, s10 = sgn[i, j], sgn[i + 1, j]
            s01, s11 = sgn[i, j + 1], sgn[i + 1, j + 1]
            if s00 == s10 == s01 == s11:
                continue
            crossed = []
            if s00 != s10:
                crossed.append(edge_point("u", i, j))
            if s01 != s11:
                crossed.append(edge_point("u", i, j + 1))
            if s00 != s01:
                crossed.append(edge_point("v", i, j))
            if s10 != s11:
                crossed.append(edge_point("v", i + 1, j))
            if len(crossed) == 2:
                connect(crossed[0], crossed[1])
            elif len(crossed) == 4:
                # saddle: split according to the center sign
                center = poly.eval_float(0.5 * (xs[i] + xs[i + 1]), 0.5 * (xs[j] + xs[j + 1]))
                bottom, top, left, right = crossed
                if (center >= 0) == (s00 > 0):
                    connect(bottom, right)
                    connect(top, left)
                else:
                    connect(bottom, left)
                    connect(top, right)

    # walk the adjacency graph into polylines
    visited = set()
    polylines = []
    open_ends = [k for k, nb in adjacency.items() if len(nb) == 1]
    for start in open_ends + list(adjacency):
        if start in visited or start not in adjacency:
            continue
        path = [start]
        visited.add(start)
        cur = start
        while True:
            nxt = next((nb for nb in adjacency[cur] if nb not in visited), None)
            if nxt is None:
                break
            path.append(nxt)
            visited.add(nxt)
            cur = nxt
        if len(path) >= 2:
            closed = path[0] in adjacency.get(path[-1], [])
            pts = [points[k] for k in path]
            if closed and len(path) > 2:
                pts.append(points[path[0]])
            polylines.append(np.array(pts))
    return polylines


def _project_midpoints(poly, pts_a, pts_b):
    """Project segment midpoints onto {poly = 0} along the segment normals."""
    seg = pts_b - pts_a
    seglen = np.hypot(seg[:, 0], seg[:, 1])
    mids = 0.5 * (pts_a + pts_b)
    normals = np.stack([-seg[:, 1], seg[:, 0]], axis=1) / np.maximum(seglen, 1e-300)[:, None]
    delta = (0.75 * seglen)[:, None]
    lo = mids - delta * normals
    hi = mids + delta * normals
    f_lo = poly.eval_float(lo[:, 0], lo[:, 1])
    bracketed = (f_lo > 0) != (poly.eval_float(hi[:, 0], hi[:, 1]) > 0)
    a, b, fa = lo, hi, f_lo
    for _ in range(30):
        mid_ab = 0.5 * (a + b)
        fm = poly.eval_float(mid_ab[:, 0], mid_ab[:, 1])
        swap = (fm > 0) == (fa > 0)
        a = np.where(swap[:, None], mid_ab, a)
        fa = np.where(swap, fm, fa)
        b = np.where(swap[:, None], b, mid_ab)
    proj = 0.5 * (a + b)
    return np.where(bracketed[:, None], proj, mids)


def _snap_chain(poly, pts):
    """Replace interior vertices by on-curve projections of segment midpoints.

    Marching-squares vertices are O(h) off the curve and zigzag, biasing the
    length upward; after snapping, the chain is inscribed and underestimates.
    """
    proj = _project_midpoints(poly, pts[:-1], pts[1:])
    return np.vstack([pts[:1], proj, pts[-1:]])


def _refine_polyline(poly, pts, tol, max_rounds=40):
    """Adaptive polyline refinement: only segments still gaining length split.

    Stops once a full round adds less than ``tol`` to the length.
    """
    pts = _snap_chain(poly, pts)
    length = float(np.sum(np.hypot(*(pts[1:] - pts[:-1]).T)))
    segments = [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]
    active = segments
    for _ in range(max_rounds):
        if not active:
            return length
        pa = np.array([s[0] for s in active])
        pb = np.array([s[1] for s in active])
        proj = _project_midpoints(poly, pa, pb)
        old_len = np.hypot(*(pb - pa).T)
        new_len = np.hypot(*(proj - pa).T) + np.hypot(*(pb - proj).T)
        gain = new_len - old_len
        round_gain = float(gain.sum())
        eps_seg = tol / max(4 * len(active), 1)
        nxt = []
        for i in range(len(active)):
            if gain[i] > eps_seg:
                length += float(gain[i])
                nxt.append((pa[i], proj[i]))
                nxt.append((proj[i], pb[i]))
        active = nxt
        if round_gain < tol:
            return length
    raise TraceError("polyline refinement failed to converge")


def trace_boundary(poly, grid_n=512, tol=1e-6):
    """Adaptive length estimate of {poly = 0} inside the square.

    Returns (upper length estimate, component count); the estimate carries a
    1% safety factor on top of the converged polyline length.
    """
    if poly.is_zero:
        raise DegenerateError("cannot trace the zero polynomial")
    if not (poly.depends_on_u() and poly.depends_on_v()):
        return _univariate_line_trace(poly)
    polylines = _marching_polylines(poly, grid_n)
    total = 0.0
    for pts in polylines:
        total += _refine_polyline(poly, pts, tol)
    return total * 1.01, len(polylines)


def curve_length(poly, grid_n=512, tol=1e-6):
    """Upper estimate of the length of {poly = 0} within [-2,2]^2."""
    length, _ = trace_boundary(poly, grid_n=grid_n, tol=tol)
    return length


# -- effective error envelopes -----------------------------------------------------

ENVELOPE_MODES = ("Unconditional13", "Unconditional12", "GRH13", "GRH12")


def m_of_x(x, conductor_product):
    """The decay driver M(x) = (sqrt(log x) / log(K log x))^(1/2), K = k k' N N'."""
    if x < 2:
        raise DomainError(f"M(x) requires x >= 2, got {x}")
    log_x = math.log(x)
    inner = conductor_product * log_x
    if inner <= 1:
        raise DomainError("log(K log x) must be positive; increase x or K")
    return math.sqrt(math.sqrt(log_x) / math.log(inner))


def _pi_x(x):
    if x <= 1e8:
        from . import counting

        return counting.sieve(int(x)).count()
    from scipy.special import expi

    return float(expi(math.log(x)))  # logarithmic-integral approximation


@dataclass(frozen=True)
class ErrorEnvelope:
    """Error envelope for the effective joint equidistribution estimates."""

    mode: str
    k: int
    k_prime: int
    level: int
    level_prime: int
    length: float
    alpha: int
    beta: int

    def __post_init__(self):
        if self.mode not in ENVELOPE_MODES:
            raise DomainError(f"unknown envelope mode {self.mode!r}")

    @property
    def conductor_product(self):
        return self.k * self.k_prime * self.level * self.level_prime

    def value(self, x):
        return error_envelope(
            self.mode, x, self.k, self.k_prime, self.level, self.level_prime,
            self.length, self.alpha, self.beta,
        )

    def ratio(self, x):
        return self.value(x) / _pi_x(x)


def error_envelope(mode, x, k, k_prime, level, level_prime, length, alpha, beta, pi_x=None):
    """Envelope magnitude at x for the four error shapes.

    Unconditional13: L a pi(x) / M(x)^(1/3)
    Unconditional12: L a b pi(x) / M(x)^(1/2)
    GRH13:  L a x^(17/18) log(K x)^(1/9) / (log x)^(2/3)
    GRH12:  L a b x^(11/12) log(K x)^(1/6) / (log x)^(1/2)

    pi(x) may be supplied by the caller; otherwise it is the exact sieve
    count up to 10^8 and the logarithmic-integral approximation beyond.
    """
    if mode not in ENVELOPE_MODES:
        raise DomainError(f"unknown envelope mode {mode!r}")
    if x < 16:
        raise DomainError(f"envelopes are defined for x >= 16, got {x}")
    K = k * k_prime * level * level_prime
    log_x = math.log(x)
    if mode in ("Unconditional13", "Unconditional12"):
        if pi_x is None:
            pi_x = _pi_x(x)
        if mode == "Unconditional13":
            return length * alpha * pi_x / m_of_x(x, K) ** (1.0 / 3.0)
        return length * alpha * beta * pi_x / math.sqrt(m_of_x(x, K))
    log_kx = math.log(K * x)
    if mode == "GRH13":
        return length * alpha * x ** (17.0 / 18.0) * log_kx ** (1.0 / 9.0) / log_x ** (2.0 / 3.0)
    return length * alpha * beta * x ** (11.0 / 12.0) * log_kx ** (1.0 / 6.0) / math.sqrt(log_x)


# -- region files -------------------------------------------------------------------


def _graded_lex_monomials(degree):
    for d in range(degree + 1):
        for i in range(d, -1, -1):
            yield (i, d - i)


def parse_region_file(path):
    """Parse a region definition file: one constraint per line, all conjoined.

    Line grammar: ``poly <c0> <c1> ... cmp <op> bound <real>`` where the
    coefficients enumerate monomials in graded-lex order (1; u, v; u^2, uv,
    v^2; ...) and <op> is one of <, <=, >, >=.
    """
    cons = []
    with open(path, encoding="utf-8") as fh:
        for lineno, rawline in enumerate(fh, start=1):
            line = rawline.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                if tokens[0] != "poly":
                    raise ValueError("line must start with 'poly'")
                cmp_at = tokens.index("cmp")
                bound_at = tokens.index("bound")
                coeff_tokens = tokens[1:cmp_at]
                op = tokens[cmp_at + 1]
                bound = Fraction(tokens[bound_at + 1])
            except (ValueError, IndexError) as exc:
                raise ParseError(str(exc), lineno) from None
            if op not in _OPS:
                raise ParseError(f"unknown comparison {op!r}", lineno)
            coeffs = {}
            degree = 0
            while (degree + 1) * (degree + 2) // 2 < len(coeff_tokens):
                degree += 1
            monos = list(_graded_lex_monomials(degree))
            if len(coeff_tokens) > len(monos):
                raise ParseError("coefficient list length is not triangular", lineno)
            for mono, tok in zip(monos, coeff_tokens):
                try:
                    coeffs[mono] = Fraction(tok)
                except ValueError:
                    raise ParseError(f"bad coefficient {tok!r}", lineno) from None
            poly = Poly2(coeffs) - Poly2.constant(bound)
            cons.append(Constraint(poly, op))
    if not cons:
        raise ParseError("region file defines no constraints")
    return PolynomialRegion(tuple(cons), label=str(path))
