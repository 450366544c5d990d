import math

import numpy as np
import pytest
from oracles import tensor_rightmost_count

from ginibre_tails import exact_tails as et
from ginibre_tails.errors import InvalidArgumentError
from ginibre_tails.specfun import log_reg_gamma_q, reg_gamma_p


def test_kostlan_closed_forms():
    assert et.kostlan_radius_tail(1, 1.0).p == pytest.approx(math.exp(-1), rel=1e-10)
    assert et.kostlan_radius_tail(1, 1.3).p == pytest.approx(math.exp(-1.69), rel=1e-10)
    two = 1 - (1 - math.exp(-2)) * (1 - 3 * math.exp(-2))
    assert et.kostlan_radius_tail(2, 1.0).p == pytest.approx(two, rel=1e-10)
    assert et.kostlan_radius_tail(2, 1.0).kind == "exact"


def test_kostlan_matches_direct_product():
    for n, t in ((5, 0.8), (30, 1.0), (100, 1.1)):
        direct = 1 - np.prod([reg_gamma_p(k, n * t * t) for k in range(1, n + 1)])
        assert et.kostlan_radius_tail(n, t).p == pytest.approx(direct, rel=1e-11)


def test_kostlan_deep_tail_against_union():
    # far out, P = sum Q (1 - O(sum Q)); both are ~ e^-5800 here
    tail = et.kostlan_radius_tail(1000, 3.0)
    assert math.isfinite(tail.log_p)
    assert tail.info["log_union_lower"] <= tail.log_p <= tail.info["log_union_upper"]


def test_kostlan_invalid():
    with pytest.raises(InvalidArgumentError):
        et.kostlan_radius_tail(10, 0.0)
    with pytest.raises(InvalidArgumentError):
        et.kostlan_radius_tail(0, 1.0)


def test_kostlan_tail_decreasing_in_t():
    vals = [et.kostlan_radius_tail(200, t).log_p for t in np.linspace(0.8, 2.0, 25)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_expected_count_closed_forms():
    assert et.expected_count_radius(2, 1, 1.0).count == pytest.approx(math.exp(-1), rel=1e-14)
    assert et.expected_count_radius(2, 2, 1.0).count == pytest.approx(4 * math.exp(-2), rel=1e-14)


@pytest.mark.parametrize("n", [10, 1000, 10_000])
def test_count_identity_against_pointwise_q(n):
    t = 1.02
    pointwise = np.logaddexp.reduce([log_reg_gamma_q(k, n * t * t) for k in range(1, n + 1)])
    assert abs(math.expm1(et.expected_count_radius(2, n, t).log_count - pointwise)) <= 1e-11


def test_count_qsum_vs_quadrature():
    n, t = 100, 1.3
    from ginibre_tails.kernels import complex_count_radius_quad

    assert math.exp(complex_count_radius_quad(n, t).log_value - et.expected_count_radius(2, n, t).log_count) == pytest.approx(
        1, abs=1e-8
    )


def test_rightmost_against_tensor_grid():
    n, t = 100, 1.3
    got = et.expected_count_rightmost(2, n, t).count
    assert got == pytest.approx(tensor_rightmost_count(n, t), rel=1e-6)


def test_rightmost_properties():
    assert et.expected_count_rightmost(2, 40, 1e-8).count == pytest.approx(20, rel=1e-6)
    for t in (1.0, 1.2, 1.5):
        assert et.expected_count_rightmost(2, 50, t).count <= et.expected_count_radius(2, 50, t).count


def test_real_counts_compose():
    n, t = 30, 1.1
    radius = et.expected_count_radius(1, n, t).count
    right = et.expected_count_rightmost(1, n, t).count
    rmax = et.expected_count(et.TailQuery(1, "real_max", n, t)).count
    cmm = et.expected_count(et.TailQuery(1, "complex", n, t)).count
    assert radius == pytest.approx(2 * rmax + cmm, rel=1e-12)
    assert rmax < right < radius


def test_tail_query_validation():
    with pytest.raises(InvalidArgumentError):
        et.TailQuery(2, "real_max", 10, 1.1)
    with pytest.raises(InvalidArgumentError):
        et.TailQuery(1, "radius", 10, -1.0)
    with pytest.raises(InvalidArgumentError):
        et.TailQuery(1, "leftmost", 10, 1.0)
    assert et.TailQuery("real", "real", 10, 1).statistic == "real_max"


def test_bracket_contains_exact_on_grid():
    for n in (1, 5, 30, 200):
        for t in (0.9, 1.0, 1.2, 1.6):
            b = et.tail_bracket(et.TailQuery(2, "radius", n, t))
            assert b.lower.log_p <= b.exact.log_p + 1e-12
            assert b.exact.log_p <= b.upper.log_p + 1e-12
            assert b.lower.kind == "lower_bound" and b.upper.kind == "upper_bound"


def test_bracket_width_is_log_n():
    b = et.tail_bracket(et.TailQuery(1, "real_max", 100, 1.2))
    assert b.upper.log_p - b.lower.log_p == pytest.approx(math.log(100), abs=1e-12)
    assert b.exact is None


@pytest.mark.parametrize("kind", et.IBP_KINDS)
def test_ibp_brackets(kind):
    for n in (10, 100, 2000, 10_000):
        for t in (1.1, 1.4, 2.0):
            val = et.ibp_integral(kind, n, t)
            lo, up = et.ibp_bounds(kind, n, t)
            assert lo <= val.log_value <= up
            assert val.truncation_bound <= 1e-16 * val.value or val.log_truncation <= val.log_value + math.log(1e-16)


def test_ldp_slope_with_log_n_correction():
    t = 1.3
    rate = t * t - 2 * math.log(t) - 1
    gaps = []
    for n in (100, 200, 400, 800, 1600):
        gap = -et.kostlan_radius_tail(n, t).log_p / n - rate
        assert 0.5 * math.log(n) / n - 2 / n <= gap <= 1.5 * math.log(n) / n + 2 / n
        gaps.append(gap)
    assert gaps == sorted(gaps, reverse=True)
