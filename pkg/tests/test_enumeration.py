from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyckfold.core_paths import Path, is_mdyck_path, is_mluka, num_decorations, reduced_form
from dyckfold.enumeration import (
    brute_force_counts,
    dyck_path_count,
    enumerate_all,
    fuss_catalan,
    luka_count,
    poly_eval,
    prefix_polynomial,
    prefix_weighted_count,
)

# Fuss-Catalan numbers C((m+1)t, t)/(mt+1), t = 0..5, from standard tables
FUSS_CATALAN = {
    1: [1, 1, 2, 5, 14, 42],
    2: [1, 1, 3, 12, 55, 273],
    3: [1, 1, 4, 22, 140, 969],
}


@pytest.mark.parametrize("m,n,expected", [(1, 3, 1), (2, 5, 2), (2, 7, 3), (2, 8, 7), (3, 4, 0)])
def test_luka_count(m, n, expected):
    assert luka_count(m, n) == expected


@pytest.mark.parametrize("m,n,expected", [(1, 4, 6), (1, 0, 1), (2, 4, 4), (2, 8, 28)])
def test_prefix_weighted_count(m, n, expected):
    assert prefix_weighted_count(m, n) == expected


def test_luka_examples_by_listing():
    assert [str(p) for p in enumerate_all(2, 5, "mluka")] == ["UUDUD", "UUUDD"]
    assert [str(p) for p in enumerate_all(1, 2, "mdyck_path")] == ["UD"]
    assert [str(p) for p in enumerate_all(1, 1, "mluka")] == ["D"]
    assert len(enumerate_all(2, 8, "mluka")) == 7


def test_prefix_polynomial_examples():
    assert prefix_polynomial(1, 2) == [1, 1]
    assert prefix_polynomial(1, 0) == [1]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_fuss_catalan_table(m):
    for t, expected in enumerate(FUSS_CATALAN[m]):
        assert fuss_catalan(m, t) == expected
        if t:
            assert luka_count(m, (m + 1) * t + 1) == expected
            assert dyck_path_count(m, (m + 1) * t) == expected
            assert len(enumerate_all(m, (m + 1) * t, "mdyck_path")) == expected


@pytest.mark.parametrize("m", [1, 2, 3])
def test_counts_match_brute_force(m):
    for n in range(1, 19):
        bf = brute_force_counts(m, n)
        assert bf["mluka"] == luka_count(m, n)
        assert bf["weighted_prefix"] == prefix_weighted_count(m, n)
        assert bf["mdyck_path"] == dyck_path_count(m, n)
        assert bf["mdyck_prefix"] == sum(prefix_polynomial(m, n))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_enumeration_matches_counts(m):
    for n in range(1, 19):
        lukas = enumerate_all(m, n, "mluka")
        assert len(lukas) == luka_count(m, n)
        assert (len(lukas) == 0) == (n % (m + 1) == 0)
    for n in range(1, 13):
        assert all(is_mluka(p) for p in enumerate_all(m, n, "mluka"))
        assert all(is_mdyck_path(p) for p in enumerate_all(m, n, "mdyck_path"))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_weighted_prefix_identity(m):
    for n in range(1, 15):
        prefixes = enumerate_all(m, n, "mdyck_prefix")
        weights = [m ** reduced_form(p).h_bar for p in prefixes]
        assert sum(weights) == comb(n, n // (m + 1))
        if n % (m + 1):
            assert sum(num_decorations(p) for p in prefixes) == n * luka_count(m, n)


def test_enumeration_is_sorted_and_distinct():
    ps = [str(p) for p in enumerate_all(2, 10, "mdyck_prefix")]
    assert ps == sorted(ps, key=lambda s: s.replace("D", "0").replace("U", "1"))
    assert len(set(ps)) == len(ps)


def test_enumeration_limits():
    with pytest.raises(ValueError):
        enumerate_all(1, 30, "mluka")
    with pytest.raises(ValueError):
        enumerate_all(1, 3, "paths")
    with pytest.raises(ValueError):
        luka_count(1, 0)
    assert enumerate_all(1, 0, "mdyck_prefix") == [Path([], 1)]


@given(st.integers(1, 5), st.integers(1, 60))
def test_polynomial_recurrence_and_value(m, n):
    poly = prefix_polynomial(m, n)
    assert poly_eval(poly, m) == prefix_weighted_count(m, n)
    if n % (m + 1) == 0:
        prev = prefix_polynomial(m, n - 1)
        shifted = [0] + prev
        assert poly == [a + b for a, b in zip(prev + [0], shifted)]


@given(st.integers(1, 6), st.integers(1, 400))
def test_big_counts_are_exact(m, n):
    L = luka_count(m, n)
    r = n % (m + 1)
    assert L * n == r * comb(n, n // (m + 1))
