import math

import numpy as np
import pytest

from ginibre_tails import exact_tails as et
from ginibre_tails import montecarlo as mc
from ginibre_tails.errors import InvalidArgumentError, RegimeError


def test_prob_estimate_rules():
    small = mc.ProbEstimate.from_counts(3, 1000)
    assert small.method == "wilson"
    assert small.ci95[0] <= small.p_hat <= small.ci95[1]
    big = mc.ProbEstimate.from_counts(500, 1000)
    assert big.method == "normal"
    assert big.ci95 == pytest.approx((0.5 - 1.959963984540054 * math.sqrt(0.25 / 1000), 0.5 + 1.959963984540054 * math.sqrt(0.25 / 1000)))
    zero = mc.ProbEstimate.from_counts(0, 100)
    assert zero.ci95[0] == 0.0 and zero.ci95[1] > 0
    full = mc.ProbEstimate.from_counts(100, 100)
    assert full.ci95[1] == 1.0 and full.method == "wilson"
    with pytest.raises(InvalidArgumentError):
        mc.ProbEstimate.from_counts(5, 3)


def test_estimator_coverage():
    n, t = 20, 1.1
    truth = et.kostlan_radius_tail(n, t).p
    covered = 0
    reps = 200
    for r in range(reps):
        est = mc.estimate_tail(et.TailQuery(2, "radius", n, t), 400, seed=1000 + r, route="kostlan")
        covered += est.covers(truth)
    assert covered >= 0.9 * reps


def test_kostlan_route_n1():
    est = mc.estimate_tail(et.TailQuery(2, "radius", 1, 1.0), 100_000, seed=5, route="kostlan")
    assert est.covers(math.exp(-1))


def test_route_validation():
    with pytest.raises(InvalidArgumentError):
        mc.estimate_tail(et.TailQuery(1, "radius", 10, 1.0), 10, 0, route="kostlan")
    with pytest.raises(InvalidArgumentError):
        mc.estimate_tail(et.TailQuery(2, "radius", 10, 1.0), 10, 0, route="teleport")


def test_worker_count_independence():
    q = et.TailQuery(1, "real_max", 20, 0.9)
    a = mc.estimate_tail(q, 60, seed=3, workers=1)
    b = mc.estimate_tail(q, 60, seed=3, workers=3)
    assert a == b
    s1 = mc.saturn_counts(20, 40, 1.05, seed=9, workers=1)
    s2 = mc.saturn_counts(20, 40, 1.05, seed=9, workers=2)
    assert np.array_equal(s1.records, s2.records, equal_nan=True)


def test_ldp_curve_exact():
    rows = mc.ldp_curve(2, "radius", 1.3, [100, 200, 400, 800])
    gaps = [r.gap for r in rows]
    assert gaps == sorted(gaps, reverse=True)
    assert all(r.envelope_ok for r in rows)
    assert all(r.route == "exact" for r in rows)


def test_ldp_curve_at_one():
    rows = mc.ldp_curve(2, "radius", 1.0, [100, 400, 1600])
    assert all(r.rate_target == 0 for r in rows)
    assert all(math.exp(-r.minus_log_p_over_n * r.n) > 0.3 for r in rows)


def test_ldp_curve_mc_flags_zero_hits():
    rows = mc.ldp_curve(1, "real_max", 2.5, [10], trials=20, seed=1)
    assert rows[0].flagged and math.isnan(rows[0].gap)
    with pytest.raises(InvalidArgumentError):
        mc.ldp_curve(1, "real_max", 1.3, [10])


def test_mdp_targets_scale():
    rows = mc.mdp_scaling(2, "radius", 0.25, [0.5, 1.0, 2.0], [10_000])
    targets = {r.t: r.target for r in rows}
    assert targets[1.0] == -2 and targets[2.0] == 4 * targets[1.0]
    for r in rows:
        assert abs(r.value / r.target - 1) <= 0.25
    real = mc.mdp_scaling(1, "real_max", 0.25, [1.0], [50], trials=50, seed=1)
    assert real[0].target == -1


def test_gumbel_exact_small():
    chk = mc.gumbel_check(10_000)
    assert chk.mode == "exact_cdf" and 0 <= chk.ks_stat <= 1
    assert chk.fitted_ks < chk.ks_stat
    assert mc.gumbel_limit_array(2, [0.0])[0] == pytest.approx(math.exp(-1))
    with pytest.raises(RegimeError):
        mc.gumbel_check(150)


def test_gumbel_mc_rightmost_fitted():
    chk = mc.gumbel_check(60, "mc", "complex", "rightmost", trials=200, seed=2)
    assert chk.centering == "fitted"
    assert chk.gamma_fit == pytest.approx(1 / (4 * 60 * chk.scale_fit**2))


def test_gumbel_tail_offsets_shape():
    rows = mc.gumbel_tail_offsets(10_000, [2.0, 4.0])
    assert rows[0].minus_log_tail < rows[1].minus_log_tail


def test_sdp_check_runs():
    c_s, rows = mc.sdp_check(1.5, 1000, [10_000])
    assert math.isfinite(c_s) and rows[0].n == 10_000


def test_saturn_infinite_threshold():
    res = mc.saturn_counts(15, 30, 1e9, seed=1)
    assert res.real_exceed == res.complex_exceed == res.both == 0
    with pytest.raises(InvalidArgumentError):
        mc.saturn_counts(15, 30, 0.9, seed=1)


def test_real_eigenvalue_count_small():
    from oracles import eks_real_count

    est = mc.real_eigenvalue_count(20, 2000, seed=4)
    assert abs(est.mean - eks_real_count(20)) <= 3 * est.se


def test_workers_env(monkeypatch):
    monkeypatch.setenv("WORKERS", "3")
    assert mc.default_workers() == 3
    monkeypatch.setenv("WORKERS", "zero")
    with pytest.raises(InvalidArgumentError):
        mc.default_workers()
