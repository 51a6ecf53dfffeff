"""
Tests for Farey enumeration and direction counting
"""
import itertools

import pytest

from fastdvm.exceptions import ConfigError
from fastdvm.services.farey_service import farey_service


@pytest.mark.parametrize("xs,expected", [((6, 10, 15), 1), ((4, 8, 12), 4), ((0, 5), 5), ((-4, 6), 2)])
def test_gcd_many(xs, expected):
    assert farey_service.gcd_many(xs) == expected


def test_gcd_many_rejects_all_zero():
    with pytest.raises(ConfigError):
        farey_service.gcd_many([0, 0, 0])


def test_farey_series_small_orders():
    assert farey_service.farey_series(2, 1).elements == ((0, 1), (1, 1))
    assert farey_service.farey_series(3, 1).elements == ((0, 0, 1), (0, 1, 1), (1, 1, 1))
    assert len(farey_service.farey_series(2, 3)) == 5


def test_farey_series_elements_are_coprime_and_ordered():
    series = farey_service.farey_series(3, 6)
    for p, q, r in series.elements:
        assert 0 <= p <= q <= r <= 6
        assert r >= 1
        assert farey_service.gcd_many((p, q, r)) == 1
    assert list(series.elements) == sorted(series.elements)


def test_totient_identity():
    for n_bar in (1, 7, 50, 1000):
        assert farey_service.farey_size(2, n_bar) == 1 + farey_service.totient_sum(n_bar)
    assert farey_service.farey_size(2, 7) == 19


def test_mobius_count_matches_enumeration():
    for n_bar in range(1, 60):
        assert farey_service.farey_count_mobius(n_bar) == farey_service.farey_size(2, n_bar)


def test_count_lines_formula_examples():
    assert farey_service.count_lines_formula(2, 1) == 4
    assert farey_service.count_lines_formula(2, 2) == 8
    assert farey_service.count_lines_formula(2, 3) == 16
    assert farey_service.count_lines_formula(2, 7) == 72
    assert farey_service.count_lines_formula(3, 1) == 16


def test_enumerate_directions_small_orders():
    assert set(farey_service.enumerate_directions(2, 1).dirs) == {(0, 1), (1, 0), (1, 1), (1, -1)}
    two = farey_service.enumerate_directions(2, 2)
    assert set(two.dirs) == {(0, 1), (1, 0), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)}
    assert len(farey_service.enumerate_directions(3, 1)) == 13


def test_directions_are_canonical_and_sorted():
    directions = farey_service.enumerate_directions(3, 3)
    for e in directions:
        first = next(x for x in e if x != 0)
        assert first > 0
        assert farey_service.gcd_many(e) == 1
        assert max(abs(x) for x in e) <= 3
    assert list(directions.dirs) == sorted(directions.dirs)


@pytest.mark.parametrize("d,n_bar", [(2, 1), (2, 5), (2, 10), (3, 1), (3, 4)])
def test_partition_property(d, n_bar):
    """Every nonzero box point is a nonzero multiple of exactly one direction"""
    directions = farey_service.enumerate_directions(d, n_bar)
    for k in itertools.product(range(-n_bar, n_bar + 1), repeat=d):
        if not any(k):
            continue
        owners = []
        for e in directions:
            multiples = {k[j] // e[j] for j in range(d) if e[j] != 0}
            if len(multiples) == 1:
                m = multiples.pop()
                if m != 0 and all(m * e[j] == k[j] for j in range(d)):
                    owners.append(e)
        assert len(owners) == 1, k


def test_directions_contain_axes():
    for d in (2, 3):
        for n_bar in (1, 4):
            assert farey_service.enumerate_directions(d, n_bar).contains_axes()


def test_formula_is_exact_in_2d():
    for n_bar in range(1, 51):
        assert farey_service.count_lines_formula(2, n_bar) == len(farey_service.enumerate_directions(2, n_bar))


def test_3d_formula_discrepancy_is_reported(caplog):
    report = farey_service.line_count_report(3, 1)
    assert report["enumerated_count"] == 13
    assert report["formula_count"] == 16
    assert "differs from enumeration" in caplog.text


def test_asymptotic_ratios():
    assert 0.9 <= farey_service.asymptotic_ratio(2, 200) <= 1.1
    assert 0.85 <= farey_service.asymptotic_ratio(3, 100) <= 1.15
    stated = farey_service.farey_size(3, 100) / farey_service.stated_leading_term(3, 100)
    assert stated == pytest.approx(2 * farey_service.asymptotic_ratio(3, 100))


def test_invalid_dimension():
    with pytest.raises(ConfigError):
        farey_service.enumerate_directions(4, 1)
