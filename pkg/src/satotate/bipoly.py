"""Exact bivariate polynomials over the rationals.

Coefficients are Python ints or Fractions, so composition and algebra never
round.  Float evaluation (scalar, grid, and per-cell interval enclosures) is
layered on top for the numeric paths; interval results carry a conservative
rounding pad so that a "definite sign over this box" verdict is trustworthy.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import DegenerateError

# relative pad applied to interval enclosures; dominates accumulated float
# rounding for the coefficient counts seen here (<= a few hundred monomials)
_IV_PAD = 1e-12


def _as_exact(c):
    if isinstance(c, (int, Fraction)):
        return c
    if isinstance(c, float):
        if c != int(c):
            raise TypeError("float coefficients must be integral; use Fraction")
        return int(c)
    raise TypeError(f"unsupported coefficient type {type(c)!r}")


class Poly2:
    """Polynomial in two variables (u, v) with exact coefficients."""

    __slots__ = ("coeffs", "_float_matrix", "_abs_matrix", "_du", "_dv", "_hash")

    def __init__(self, coeffs):
        clean = {}
        for (i, j), c in coeffs.items():
            c = _as_exact(c)
            if c != 0:
                clean[(int(i), int(j))] = c
        self.coeffs = clean
        self._float_matrix = None
        self._abs_matrix = None
        self._du = None
        self._dv = None
        self._hash = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls):
        return cls({})

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def from_univariate(cls, coeff_list, axis):
        """Lift a dense univariate coefficient list (ascending powers) to 2D.

        axis "u" maps coefficient k to u^k, axis "v" to v^k.
        """
        if axis == "u":
            return cls({(k, 0): c for k, c in enumerate(coeff_list)})
        if axis == "v":
            return cls({(0, k): c for k, c in enumerate(coeff_list)})
        raise ValueError("axis must be 'u' or 'v'")

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other):
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0) + c
        return Poly2(out)

    def __sub__(self, other):
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0) - c
        return Poly2(out)

    def __neg__(self):
        return Poly2({key: -c for key, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly2({key: c * other for key, c in self.coeffs.items()})
        out = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + c1 * c2
        return Poly2(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Poly2) and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.coeffs.items()))
        return self._hash

    def __repr__(self):
        if not self.coeffs:
            return "Poly2(0)"
        parts = []
        for (i, j), c in sorted(self.coeffs.items(), key=lambda t: (t[0][0] + t[0][1], -t[0][0])):
            mono = "".join(s for s, e in (("u", i), ("v", j)) for s in ([f"{s}^{e}"] if e > 1 else [s] * (e == 1)))
            parts.append(f"{c}{'*' + mono if mono else ''}")
        return "Poly2(" + " + ".join(parts) + ")"

    # -- structure -------------------------------------------------------------

    @property
    def is_zero(self):
        return not self.coeffs

    def degree_u(self):
        return max((i for i, _ in self.coeffs), default=-1)

    def degree_v(self):
        return max((j for _, j in self.coeffs), default=-1)

    def total_degree(self):
        return max((i + j for i, j in self.coeffs), default=-1)

    def depends_on_u(self):
        return any(i > 0 for i, _ in self.coeffs)

    def depends_on_v(self):
        return any(j > 0 for _, j in self.coeffs)

    def is_constant(self):
        return all(key == (0, 0) for key in self.coeffs)

    def sign_flip(self, s, t):
        """Return P(s*u, t*v) for s, t in {+1, -1}."""
        return Poly2({(i, j): c * (s ** i) * (t ** j) for (i, j), c in self.coeffs.items()})

    def swap_vars(self):
        """Return P(v, u)."""
        return Poly2({(j, i): c for (i, j), c in self.coeffs.items()})

    def rank_one_factors(self):
        """If the coefficient matrix has rank 1, return (a_coeffs, b_coeffs).

        A rank-1 coefficient matrix means P(u, v) = A(u) * B(v); the factors
        are returned as ascending univariate coefficient lists (Fractions).
        Returns None otherwise.
        """
        if not self.coeffs:
            return None
        du, dv = self.degree_u(), self.degree_v()
        mat = [[Fraction(0)] * (dv + 1) for _ in range(du + 1)]
        for (i, j), c in self.coeffs.items():
            mat[i][j] = Fraction(c)
        pi, pj = next((i, j) for (i, j), c in self.coeffs.items() if c != 0)
        pivot = mat[pi][pj]
        a = [mat[i][pj] for i in range(du + 1)]
        b = [mat[pi][j] / pivot for j in range(dv + 1)]
        for i in range(du + 1):
            for j in range(dv + 1):
                if mat[i][j] != a[i] * b[j]:
                    return None
        return a, b

    # -- evaluation ------------------------------------------------------------

    def _matrices(self):
        if self._float_matrix is None:
            du, dv = max(self.degree_u(), 0), max(self.degree_v(), 0)
            mat = np.zeros((du + 1, dv + 1))
            for (i, j), c in self.coeffs.items():
                mat[i, j] = float(c)
            self._float_matrix = mat
            self._abs_matrix = np.abs(mat)
        return self._float_matrix, self._abs_matrix

    def eval_float(self, u, v):
        """Evaluate at scalars or broadcastable numpy arrays."""
        mat, _ = self._matrices()
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        # row-wise Horner in v, then Horner in u
        acc = np.zeros(np.broadcast(u, v).shape)
        for row in mat[::-1]:
            rowval = np.zeros_like(acc)
            for c in row[::-1]:
                rowval = rowval * v + c
            acc = acc * u + rowval
        if acc.shape == ():
            return float(acc)
        return acc

    def eval_exact(self, u, v):
        """Evaluate at exact rational points."""
        u, v = Fraction(u), Fraction(v)
        total = Fraction(0)
        for (i, j), c in self.coeffs.items():
            total += Fraction(c) * u**i * v**j
        return total

    def v_coefficients_at(self, u_values):
        """Coefficients of P(u0, v) in v for an array of u0 values.

        Returns an array of shape (len(u_values), degree_v + 1), ascending
        powers of v.
        """
        mat, _ = self._matrices()
        u_values = np.asarray(u_values, dtype=float)
        upow = np.vander(u_values, mat.shape[0], increasing=True)
        return upow @ mat

    # -- interval arithmetic ---------------------------------------------------

    def interval_eval_cells(self, u_lo, u_hi, v_lo, v_hi):
        """Enclosure of P over axis-aligned boxes, vectorised over cells.

        All four bounds are broadcastable arrays; returns (lo, hi) padded by a
        rounding margin so definite-sign conclusions are conservative.
        """
        u_lo = np.asarray(u_lo, dtype=float)
        u_hi = np.asarray(u_hi, dtype=float)
        v_lo = np.asarray(v_lo, dtype=float)
        v_hi = np.asarray(v_hi, dtype=float)
        shape = np.broadcast(u_lo, u_hi, v_lo, v_hi).shape
        lo = np.zeros(shape)
        hi = np.zeros(shape)
        mag = np.zeros(shape)
        u_abs = np.maximum(np.abs(u_lo), np.abs(u_hi))
        v_abs = np.maximum(np.abs(v_lo), np.abs(v_hi))
        for (i, j), c in self.coeffs.items():
            plo, phi = _pow_interval(u_lo, u_hi, i)
            qlo, qhi = _pow_interval(v_lo, v_hi, j)
            tlo, thi = _mul_interval(plo, phi, qlo, qhi)
            cf = float(c)
            if cf >= 0:
                lo += cf * tlo
                hi += cf * thi
            else:
                lo += cf * thi
                hi += cf * tlo
            mag += abs(cf) * u_abs**i * v_abs**j
        pad = _IV_PAD * mag + 1e-300
        return lo - pad, hi + pad

    def interval_eval_grid(self, u_edges, v_edges):
        """Enclosures over every box of a tensor grid.

        u_edges/v_edges are ascending 1-D edge arrays; returns (lo, hi) of
        shape (len(u_edges)-1, len(v_edges)-1) indexed [u_strip, v_strip].
        """
        u_lo, u_hi = u_edges[:-1, None], u_edges[1:, None]
        v_lo, v_hi = v_edges[None, :-1], v_edges[None, 1:]
        return self.interval_enclosure_cells(u_lo, u_hi, v_lo, v_hi)

    def derivative(self, axis):
        if axis == "u":
            if self._du is None:
                self._du = Poly2(
                    {(i - 1, j): c * i for (i, j), c in self.coeffs.items() if i > 0}
                )
            return self._du
        if self._dv is None:
            self._dv = Poly2(
                {(i, j - 1): c * j for (i, j), c in self.coeffs.items() if j > 0}
            )
        return self._dv

    def eval_abs_float(self, u_abs, v_abs):
        """Sum of |c| u^i v^j at nonnegative arguments (magnitude bound)."""
        _, mat = self._matrices()
        u_abs = np.asarray(u_abs, dtype=float)
        v_abs = np.asarray(v_abs, dtype=float)
        acc = np.zeros(np.broadcast(u_abs, v_abs).shape)
        for row in mat[::-1]:
            rowval = np.zeros_like(acc)
            for c in row[::-1]:
                rowval = rowval * v_abs + c
            acc = acc * u_abs + rowval
        return float(acc) if acc.shape == () else acc

    def interval_enclosure_cells(self, u_lo, u_hi, v_lo, v_hi):
        """Tightened enclosure: monomial intervals intersected with the
        mean-value (centered) form.

        The centered form's width scales with the gradient over the box, so
        enclosures stay sharp where the polynomial vanishes to high order and
        the plain monomial bound would need much smaller boxes.
        """
        nlo, nhi = self.interval_eval_cells(u_lo, u_hi, v_lo, v_hi)
        if not (self.depends_on_u() or self.depends_on_v()):
            return nlo, nhi
        u_lo = np.asarray(u_lo, dtype=float)
        u_hi = np.asarray(u_hi, dtype=float)
        v_lo = np.asarray(v_lo, dtype=float)
        v_hi = np.asarray(v_hi, dtype=float)
        uc, vc = 0.5 * (u_lo + u_hi), 0.5 * (v_lo + v_hi)
        fc = self.eval_float(uc, vc)
        rad = _IV_PAD * self.eval_abs_float(np.abs(uc), np.abs(vc)) + 1e-300
        hu, hv = 0.5 * (u_hi - u_lo), 0.5 * (v_hi - v_lo)
        du = self.derivative("u")
        if not du.is_zero:
            dlo, dhi = du.interval_eval_cells(u_lo, u_hi, v_lo, v_hi)
            rad = rad + np.maximum(np.abs(dlo), np.abs(dhi)) * hu
        dv = self.derivative("v")
        if not dv.is_zero:
            dlo, dhi = dv.interval_eval_cells(u_lo, u_hi, v_lo, v_hi)
            rad = rad + np.maximum(np.abs(dlo), np.abs(dhi)) * hv
        return np.maximum(nlo, fc - rad), np.minimum(nhi, fc + rad)


def _pow_interval(lo, hi, k):
    if k == 0:
        one = np.ones_like(lo)
        return one, one
    if k == 1:
        return lo, hi
    plo, phi = lo**k, hi**k
    if k % 2 == 1:
        return plo, phi
    # even power: minimum is 0 when the interval straddles zero
    straddle = (lo < 0) & (hi > 0)
    out_lo = np.where(straddle, 0.0, np.minimum(plo, phi))
    out_hi = np.maximum(plo, phi)
    return out_lo, out_hi


def _mul_interval(alo, ahi, blo, bhi):
    p1, p2, p3, p4 = alo * blo, alo * bhi, ahi * blo, ahi * bhi
    return (
        np.minimum(np.minimum(p1, p2), np.minimum(p3, p4)),
        np.maximum(np.maximum(p1, p2), np.maximum(p3, p4)),
    )


# -- dense univariate helpers (ascending coefficient lists) --------------------


def poly1_add(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def poly1_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def poly1_pow(a, e):
    result = [1]
    base = list(a)
    while e > 0:
        if e & 1:
            result = poly1_mul(result, base)
        base = poly1_mul(base, base)
        e >>= 1
    return result


def compose_bivariate(P, u_sub, v_sub):
    """Substitute univariate polynomials into P(x, y).

    u_sub/v_sub are ascending coefficient lists in u resp. v; the result is
    an exact Poly2 in (u, v).  Raises DegenerateError if P is zero.
    """
    if P.is_zero:
        raise DegenerateError("cannot compose the zero polynomial")
    du, dv = P.degree_u(), P.degree_v()
    u_pows = [[1]]
    for _ in range(du):
        u_pows.append(poly1_mul(u_pows[-1], u_sub))
    v_pows = [[1]]
    for _ in range(dv):
        v_pows.append(poly1_mul(v_pows[-1], v_sub))
    out = {}
    for (i, j), c in P.coeffs.items():
        for a, ca in enumerate(u_pows[i]):
            if ca == 0:
                continue
            for b, cb in enumerate(v_pows[j]):
                if cb == 0:
                    continue
                key = (a, b)
                out[key] = out.get(key, 0) + c * ca * cb
    return Poly2(out)
