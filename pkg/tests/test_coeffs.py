import math

import numpy as np
import pytest

from satotate import bundled
from satotate.coeffs import (
    CoefficientTable,
    NewformDescriptor,
    Source,
    eta_product_qexpansion,
    expand_eta_quotient,
    fetch_remote,
    load_coefficient_file,
    pentagonal_series,
    write_coefficient_file,
)
from satotate.errors import (
    GapError,
    InvariantError,
    NetworkError,
    NotFoundError,
    OutOfRangeError,
    ParseError,
    RecipeError,
)

import oracles

F54 = NewformDescriptor("5.4.a.a", 4, 5, ((1, 4), (5, 4)), Source.ETA_QUOTIENT)
DELTA = NewformDescriptor("1.12.a.a", 12, 1, ((1, 24),), Source.ETA_QUOTIENT)


# -- pentagonal series ---------------------------------------------------------


def test_pentagonal_matches_naive_products():
    for bound in (1, 2, 7, 40, 77):
        assert list(pentagonal_series(bound).coeffs) == oracles.naive_product_series(bound)


def test_pentagonal_bound_seven():
    # 1 - q - q^2 + q^5 + q^7
    assert pentagonal_series(7).coeffs == (1, -1, -1, 0, 0, 1, 0, 1)


def test_pentagonal_rejects_zero_bound():
    with pytest.raises(RecipeError):
        pentagonal_series(0)
    assert pentagonal_series(1).coeffs == (1, -1)


def test_pentagonal_coefficient_twelve():
    # exponent 12 is hit by j = 3, so the sign is (-1)^3; the naive product
    # oracle agrees
    series = pentagonal_series(12)
    assert series.coeffs[12] == -1
    assert oracles.naive_product_series(12)[12] == -1


def test_pentagonal_support_is_pentagonal_numbers():
    series = pentagonal_series(200)
    pent = set()
    j = 1
    while j * (3 * j - 1) // 2 <= 200:
        pent.add(j * (3 * j - 1) // 2)
        pent.add(j * (3 * j + 1) // 2)
        j += 1
    for e, c in enumerate(series.coeffs):
        if e == 0:
            assert c == 1
        elif c != 0:
            assert abs(c) == 1 and e in pent


# -- eta expansion ---------------------------------------------------------------


def test_eta_golden_weight4_level5():
    table = expand_eta_quotient(F54, 9)
    assert table.raw == (1, -4, 2, 8, -5, -8, 6, 0, -23)


def test_eta_discriminant_prefix():
    table = expand_eta_quotient(DELTA, 10)
    assert table.raw == oracles.TAU_REF


def test_eta_matches_naive_expansion():
    table = expand_eta_quotient(F54, 40)
    naive = oracles.naive_eta_qexpansion([(1, 4), (5, 4)], 40)
    assert list(table.raw) == naive[1:41]


def test_eta_trivial_bound():
    assert expand_eta_quotient(F54, 1).raw == (1,)


def test_eta_determinism_under_reordering():
    d_rev = NewformDescriptor("5.4.a.a", 4, 5, ((5, 4), (1, 4)), Source.ETA_QUOTIENT)
    assert expand_eta_quotient(d_rev, 500).raw == expand_eta_quotient(F54, 500).raw


def test_eta_wide_integers_beyond_int64():
    # weight-12 coefficients overflow 64-bit well below 10^4; the engine must
    # keep exact values (validated against Hecke multiplicativity)
    table = expand_eta_quotient(DELTA, 4000)
    assert max(abs(c) for c in table.raw) > 2**63
    assert table.a_int(3996) == table.a_int(4) * table.a_int(999)  # gcd(4, 999) = 1


def test_eta_negative_exponent_division():
    # eta^36 / eta^12 must reproduce eta^24 exactly, exercising the
    # sparse-division path
    combined = eta_product_qexpansion(((1, 36), (1, -12)), 12)
    plain = eta_product_qexpansion(((1, 24),), 12)
    assert combined == plain
    assert tuple(plain[1:11]) == oracles.TAU_REF


def test_descriptor_validation():
    with pytest.raises(InvariantError):
        NewformDescriptor("x", 3, 5)  # odd weight
    with pytest.raises(InvariantError):
        NewformDescriptor("x", 4, 0)  # level below 1


def test_recipe_validation():
    with pytest.raises(RecipeError):
        NewformDescriptor("x", 4, 5, ((1, 4), (5, 3)), Source.ETA_QUOTIENT)  # odd weight sum
    with pytest.raises(RecipeError):
        NewformDescriptor("x", 4, 5, ((1, 5), (5, 3)), Source.ETA_QUOTIENT)  # v not integral
    with pytest.raises(RecipeError):
        NewformDescriptor("x", 4, 5, ((2, 4), (5, 4)), Source.ETA_QUOTIENT)  # 2 does not divide 5
    with pytest.raises(RecipeError):
        expand_eta_quotient(NewformDescriptor("x", 4, 5, None), 10)


def test_deligne_bound_sweep(f54_table):
    k = f54_table.descriptor.weight
    mask = np.ones(10**4 + 1, dtype=bool)
    mask[:2] = False
    for q in range(2, 101):
        if mask[q]:
            mask[q * q :: q] = False
    for p in np.flatnonzero(mask):
        p = int(p)
        if p == 5:
            continue
        a = f54_table.a_int(p) / p ** ((k - 1) / 2)
        assert abs(a) <= 2 + 1e-12, p


def test_multiplicativity_spot_check(f54_table, delta_table):
    for table in (f54_table, delta_table):
        for m in range(2, 51):
            for n in range(2, 51):
                if math.gcd(m, n) == 1 and m * n <= table.bound:
                    assert table.a_int(m * n) == table.a_int(m) * table.a_int(n)


# -- normalized values --------------------------------------------------------------


def test_normalized_prime_values(f54_table, f66_table):
    assert f54_table.normalized_prime_value(2) == pytest.approx(-4 / 2**1.5, abs=1e-9)
    assert f66_table.normalized_prime_value(7) == pytest.approx(176 / 7**2.5, abs=1e-9)
    with pytest.raises(OutOfRangeError):
        f54_table.normalized_prime_value(10**6 + 3)


def test_normalized_zero_coefficient():
    table = CoefficientTable(NewformDescriptor("toy", 2, 33), [1, 0, 1])
    assert table.normalized_prime_value(2) == 0.0


def test_memoization(f54_table):
    v1 = f54_table.normalized_prime_value(11)
    assert f54_table._norm_cache[11] == v1


# -- file format ---------------------------------------------------------------------


def test_file_round_trip(tmp_path, f54_table):
    path = tmp_path / "f54.txt"
    write_coefficient_file(path, f54_table)
    loaded = load_coefficient_file(path)
    assert loaded.raw == f54_table.raw
    assert loaded.descriptor.weight == 4 and loaded.descriptor.level == 5


def test_file_golden_66(tmp_path):
    table = load_coefficient_file(bundled.snapshot_path())
    assert table.raw == bundled.SNAPSHOT_6_6_A_A


def test_file_empty_body(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("label=6.6.a.a k=6 N=6\n")
    with pytest.raises(GapError):
        load_coefficient_file(path)


def test_file_gap(tmp_path):
    path = tmp_path / "gap.txt"
    path.write_text("label=6.6.a.a k=6 N=6\n1 1\n3 -9\n")
    with pytest.raises(GapError):
        load_coefficient_file(path)


def test_file_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("label 6.6.a.a k=6 N=6\n1 1\n")
    with pytest.raises(ParseError):
        load_coefficient_file(path)


def test_file_deligne_violation(tmp_path):
    lines = ["label=6.6.a.a k=6 N=6"]
    vals = [1, 4, -9, 16, -66, -36, 300]  # |300| > 2 * 7^{2.5} ~ 259.3
    lines += [f"{i + 1} {v}" for i, v in enumerate(vals)]
    path = tmp_path / "bad66.txt"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(InvariantError):
        load_coefficient_file(path)


def test_file_comments(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("# header comment\nlabel=t k=2 N=33\n1 1  # unit\n2 0\n")
    assert load_coefficient_file(path).raw == (1, 0)


# -- remote fetch ----------------------------------------------------------------------


def test_fetch_matches_eta(tmp_path, coeff_server):
    server, base = coeff_server
    table = fetch_remote("5.4.a.a", 9, base_url=base, cache_dir=tmp_path)
    assert table.raw == (1, -4, 2, 8, -5, -8, 6, 0, -23)


def test_fetch_66_snapshot(tmp_path, coeff_server):
    server, base = coeff_server
    table = fetch_remote("6.6.a.a", 9, base_url=base, cache_dir=tmp_path)
    assert table.raw == bundled.SNAPSHOT_6_6_A_A


def test_fetch_cache_idempotent(tmp_path, coeff_server):
    server, base = coeff_server
    t1 = fetch_remote("5.4.a.a", 20, base_url=base, cache_dir=tmp_path)
    hits_after_first = len(server.hits)
    t2 = fetch_remote("5.4.a.a", 20, base_url=base, cache_dir=tmp_path)
    assert len(server.hits) == hits_after_first  # warm cache: no network
    assert t1.raw == t2.raw


def test_fetch_unknown_label(tmp_path, coeff_server):
    server, base = coeff_server
    with pytest.raises(NotFoundError):
        fetch_remote("99.99.z.z", 9, base_url=base, cache_dir=tmp_path)


def test_fetch_network_error(tmp_path):
    with pytest.raises(NetworkError):
        fetch_remote("5.4.a.a", 9, base_url="http://127.0.0.1:9", cache_dir=tmp_path, timeout=0.5)


# -- bundled reconstruction ---------------------------------------------------------------


def test_level6_reconstruction_agrees_with_snapshot():
    table = bundled.bundled_table("6.6.a.a", 60)
    assert table.raw[:9] == bundled.SNAPSHOT_6_6_A_A
    # Hecke consistency at the ramified primes: A(p^r) = A(p)^r for p | N
    assert table.a_int(4) == table.a_int(2) ** 2
    assert table.a_int(8) == table.a_int(2) ** 3
    assert table.a_int(9) == table.a_int(3) ** 2
    # multiplicativity across the levels
    assert table.a_int(6) == table.a_int(2) * table.a_int(3)
    assert table.a_int(35) == table.a_int(5) * table.a_int(7)


def test_seed_cache(tmp_path):
    files = bundled.seed_cache(tmp_path, 30)
    assert sorted(f.name for f in files) == ["5.4.a.a.txt", "6.6.a.a.txt"]
    table = load_coefficient_file(tmp_path / "6.6.a.a.txt")
    assert table.bound == 30
