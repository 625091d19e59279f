"""Offline constructors for the bundled newforms.

Two forms carry eta recipes (5.4.a.a and the discriminant form 1.12.a.a).
The weight-6 level-6 form 6.6.a.a has no single-eta-quotient expression; it
is reconstructed as the integer combination

    -eta(z)^6 eta(3z)^6 + 8 eta(2z)^6 eta(6z)^6
    + 2 eta(z)^5 eta(2z)^5 eta(3z) eta(6z)

of holomorphic eta-quotient cusp forms of the same weight and level.  The
combination is solved from the first three coefficients and then checked
against the shipped nine-coefficient snapshot; since agreement through
q^9 exceeds the Sturm bound (6) for weight 6 on Gamma_0(6), a full match
identifies the combination with the newform, not merely an approximation.
Every full-table invariant (Deligne bound, ramified-prime values) is checked
again on construction.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .coeffs import (
    CoefficientTable,
    NewformDescriptor,
    Source,
    eta_product_qexpansion,
    expand_eta_quotient,
    write_coefficient_file,
)
from .errors import InvariantError, NotFoundError

ETA_RECIPES = {
    "5.4.a.a": ((1, 4), (5, 4)),
    "1.12.a.a": ((1, 24),),
}

_WEIGHT_LEVEL = {
    "5.4.a.a": (4, 5),
    "1.12.a.a": (12, 1),
    "6.6.a.a": (6, 6),
}

#: First nine coefficients of 6.6.a.a, shipped as an offline snapshot.
SNAPSHOT_6_6_A_A = (1, 4, -9, 16, -66, -36, 176, 64, 81)

#: Cusp-form basis used to reconstruct 6.6.a.a (recipes on divisors of 6).
_LEVEL6_BASIS = (
    ((1, 6), (3, 6)),
    ((2, 6), (6, 6)),
    ((1, 5), (2, 5), (3, 1), (6, 1)),
)

BUNDLED_LABELS = tuple(sorted(_WEIGHT_LEVEL))


def descriptor_for(label):
    if label not in _WEIGHT_LEVEL:
        raise NotFoundError(f"no bundled data for label {label!r}")
    k, N = _WEIGHT_LEVEL[label]
    recipe = ETA_RECIPES.get(label)
    source = Source.ETA_QUOTIENT if recipe else Source.FILE
    return NewformDescriptor(label=label, weight=k, level=N, eta_recipe=recipe, source=source)


def _solve_level6_combination(series, target):
    """Solve sum_i x_i * series_i = target on q^1..q^3 with exact rationals."""
    rows = [[Fraction(s[n]) for s in series] + [Fraction(target[n])] for n in (1, 2, 3)]
    size = len(series)
    for col in range(size):
        pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
        if pivot is None:
            raise InvariantError("level-6 eta basis is degenerate")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        rows[col] = [x / rows[col][col] for x in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return [rows[r][size] for r in range(size)]


def build_6_6_a_a(n_max):
    """Reconstruct 6.6.a.a up to n_max; exact integers, fully re-verified."""
    length = max(n_max, 9)
    series = [eta_product_qexpansion(recipe, length) for recipe in _LEVEL6_BASIS]
    target = (0,) + SNAPSHOT_6_6_A_A
    weights = _solve_level6_combination(series, target)
    combo = []
    for n in range(1, length + 1):
        value = sum(w * s[n] for w, s in zip(weights, series))
        if value.denominator != 1:
            raise InvariantError(f"non-integral coefficient at n={n}")
        combo.append(int(value))
    if tuple(combo[:9]) != SNAPSHOT_6_6_A_A:
        raise InvariantError("level-6 combination does not match the snapshot expansion")
    return CoefficientTable(descriptor_for("6.6.a.a"), combo[:n_max])


def bundled_table(label, n_max):
    """Coefficient table for a bundled label, computed entirely offline."""
    if label in ETA_RECIPES:
        return expand_eta_quotient(descriptor_for(label), n_max)
    if label == "6.6.a.a":
        return build_6_6_a_a(n_max)
    raise NotFoundError(f"no bundled data for label {label!r}")


def snapshot_path():
    """Path of the packaged nine-coefficient snapshot file for 6.6.a.a."""
    return Path(__file__).parent / "data" / "6.6.a.a.q9.txt"


def seed_cache(cache_dir, n_max, labels=("5.4.a.a", "6.6.a.a")):
    """Write bundled tables into a fetch cache, enabling offline runs.

    Returns the list of files written.
    """
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for label in labels:
        table = bundled_table(label, n_max)
        path = cache_dir / f"{label}.txt"
        write_coefficient_file(path, table)
        written.append(path)
    return written
