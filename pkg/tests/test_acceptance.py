"""Acceptance harness.  Each test prints one PASS/FAIL line for its criterion.

Run ``python3 tests/test_acceptance.py`` for the lines alone, or let pytest
collect it; the lines are also repeated in the terminal summary.

Criterion 4 needs roughly a day of single-core eigenvalue work and runs only
with ``GINIBRE_FULL_ACCEPTANCE=1``.
"""

import math
import os

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES
from oracles import chi_tail_oracle

from ginibre_tails import exact_tails as et
from ginibre_tails import kernels as kn
from ginibre_tails import montecarlo as mc
from ginibre_tails.deviation import rate_I

FULL = os.environ.get("GINIBRE_FULL_ACCEPTANCE") == "1"


def record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} | {detail}"
    print(line)
    ACCEPTANCE_LINES[k] = line
    assert ok, line


def test_c01_kostlan_exactness():
    draws = 10**6
    worst = 0.0
    for n in (1, 2, 5, 30):
        ts = (1.0, 1.1, 1.3)
        hits = chi_tail_oracle(n, ts, draws, seed=100 + n)
        for t in ts:
            p = et.kostlan_radius_tail(n, t).p
            se = math.sqrt(p * (1 - p) / draws)
            worst = max(worst, abs(hits[t] / draws - p) / se)
    closed = {
        (1, 1.0): math.exp(-1),
        (2, 1.0): 1 - (1 - math.exp(-2)) * (1 - 3 * math.exp(-2)),
        (1, 1.3): math.exp(-1.69),
    }
    err = max(abs(et.kostlan_radius_tail(n, t).p - v) for (n, t), v in closed.items())
    record(1, worst <= 4 and err <= 1e-10, f"max |z| vs chi oracle {worst:.2f} (<=4), closed-form error {err:.1e} (<=1e-10)")


def test_c02_route_triangulation():
    worst = 0.0
    for n in (10, 50, 120, 300, 500):
        for t in (0.9, 1.0, 1.05, 1.15, 1.3):
            qsum = et.expected_count_radius(2, n, t).log_count
            quad = kn.complex_count_radius_quad(n, t).log_value
            worst = max(worst, abs(math.expm1(quad - qsum)))
    zs = []
    for i, t in enumerate((0.9, 1.0, 1.05, 1.15, 1.3)):
        est = mc.mc_expected_count_radius(50, t, 10**5, seed=200 + i)
        qsum = et.expected_count_radius(2, 50, t).count
        quad = kn.complex_count_radius_quad(50, t).value
        zs.append(max(abs(est.mean - qsum), abs(est.mean - quad)) / est.se)
    ok = worst <= 1e-8 and max(zs) <= 3
    record(2, ok, f"Q-sum vs quadrature max rel {worst:.1e} (<=1e-8); MC at n=50 max |z| {max(zs):.2f} (<=3)")


def test_c03_ldp_slope():
    t = 1.3
    rate = rate_I(2, t).rate
    gaps, inside = [], True
    for n in (100, 200, 400, 800, 1600):
        gap = -et.kostlan_radius_tail(n, t).log_p / n - rate
        inside &= abs(gap) <= 2 * math.log(n) / n
        gaps.append(gap)
    shrinking = all(a > b for a, b in zip(gaps, gaps[1:]))
    record(3, inside and shrinking, "gaps " + ", ".join(f"{g:.4f}" for g in gaps) + f"; within 2 log n/n: {inside}; shrinking: {shrinking}")


@pytest.mark.slow
def test_c04_real_ldp():
    if not FULL:
        ACCEPTANCE_LINES[4] = "criterion 4: NOT RUN | about 20 CPU-hours of eigenvalue work; set GINIBRE_FULL_ACCEPTANCE=1"
        pytest.skip("about 20 CPU-hours; set GINIBRE_FULL_ACCEPTANCE=1")
    t, trials = 1.10, 10**5
    rate = rate_I(1, t).rate
    ok, parts = True, []
    for n in (200, 400, 800):
        est = mc.estimate_tail(et.TailQuery(1, "radius", n, t), trials, seed=400 + n)
        b = et.tail_bracket(et.TailQuery(1, "radius", n, t))
        val = -math.log(est.p_hat) / n if est.hits else math.inf
        win = abs(val - rate) <= 3 * math.log(n) / n
        inb = b.lower.p <= est.p_hat <= b.upper.p
        ok &= win and inb
        parts.append(f"n={n}: -log p/n {val:.5f} vs {rate:.5f}, in bracket {inb}")
    record(4, ok, "; ".join(parts))


def test_c05_moderate_deviations():
    rows = mc.mdp_scaling(2, "radius", 0.25, [0.5, 1.0, 2.0], [1000, 10_000])
    res = {(r.n, r.t): abs(r.value / r.target - 1) for r in rows}
    within = all(res[(10_000, t)] <= 0.25 for t in (0.5, 1.0, 2.0))
    shrink = all(res[(10_000, t)] < res[(1000, t)] for t in (0.5, 1.0, 2.0))
    detail = "; ".join(f"t={t}: residual {res[(1000, t)]:.4f} -> {res[(10_000, t)]:.4f}" for t in (0.5, 1.0, 2.0))
    record(5, within and shrink, f"{detail}; within 25%: {within}; shrinking: {shrink}")


def test_c06_gumbel_limit():
    grid = np.linspace(-4.0, 12.0, 161)
    big = mc.gumbel_check(10**6, grid=grid)
    small = mc.gumbel_check(10**4, grid=grid)
    tails = mc.gumbel_tail_offsets(10**6, [2.0, 4.0, 6.0, 8.0])
    ks_ok = big.ks_stat <= 0.05 and big.ks_stat < small.ks_stat
    tail_ok = all(r.within for r in tails)
    offs = ", ".join(f"s={r.s:g}: {r.minus_log_tail:.2f} vs {r.prediction:.2f}" for r in tails)
    record(
        6,
        ks_ok and tail_ok,
        f"raw KS {big.ks_stat:.4f} at 1e6 (<=0.05) vs {small.ks_stat:.4f} at 1e4; fitted KS {big.fitted_ks:.4f}; tails {offs}",
    )


@pytest.mark.slow
def test_c07_saturn_effect():
    n, trials = 500, 10**4
    thr = 1 + 3 / math.sqrt(n)
    res = mc.saturn_counts(n, trials, thr, seed=700)
    b = et.tail_bracket(et.TailQuery(1, "real_max", n, thr))
    freq = res.real_exceed / trials
    inb = b.lower.p <= freq <= b.upper.p
    ok = res.real_exceed > res.complex_exceed and inb
    e_cx = et.expected_count(et.TailQuery(1, "complex", n, thr)).count
    record(
        7,
        ok,
        f"real {res.real_exceed} vs complex {res.complex_exceed} exceedances; real freq {freq:.3e} in [{b.lower.p:.3e}, {b.upper.p:.3e}]: {inb}"
        f"; expected counts real {b.count.count:.3e} vs complex {e_cx:.3e}",
    )


def test_c08_ibp_brackets():
    bad = []
    for kind in et.IBP_KINDS:
        for n in (10, 40, 160, 640, 2560, 10_000):
            for t in (1.1, 1.3, 1.6, 2.0):
                v = et.ibp_integral(kind, n, t).log_value
                lo, up = et.ibp_bounds(kind, n, t)
                if not lo <= v <= up:
                    bad.append((kind, n, t))
    record(8, not bad, f"{3 * 24 - len(bad)}/72 grid values inside their brackets")


@pytest.mark.slow
def test_c09_kernel_mass():
    mass = max(abs(math.expm1(kn.complex_count_radius_quad(n, 1e-300).log_value - math.log(n))) for n in (1, 10, 100, 500))
    pair = 0.0
    for n in (3, 10, 50, 200):
        total = 2 * kn.upper_half_count_quad(n, 0.0).value + kn.expected_real_count_quad(n).value
        pair = max(pair, abs(total - n) / n)
    zs = []
    for n in (50, 100, 200):
        est = mc.real_eigenvalue_count(n, 2000, seed=900 + n)
        zs.append(abs(est.mean - kn.expected_real_count_quad(n).value) / est.se)
    ok = mass <= 1e-8 and pair <= 1e-4 and max(zs) <= 3
    record(9, ok, f"complex mass rel err {mass:.1e}; pair-consistency rel err {pair:.1e}; real-count MC max |z| {max(zs):.2f}")


def test_c10_small_deviations():
    c_s, rows = mc.sdp_check(1.5, 1000, [10_000, 100_000])
    ok = all(r.holds for r in rows)
    detail = "; ".join(f"n={r.n}: log p {r.log_p:.3f} <= {r.log_bound:.3f}: {r.holds}" for r in rows)
    record(10, ok, f"C_s {c_s:.4f} fitted at n=1000; {detail}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
