"""Monte Carlo and exact-route experiments on extremal eigenvalues.

Trials are split into contiguous blocks and may run on several processes.
Each trial seeds its own stream from ``(master_seed, trial_index)`` and the
per-trial records are reassembled in trial order, so every result depends on
the master seed only and never on the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
import scipy.stats

from . import exact_tails as et
from .deviation import Beta, as_beta, centering, gumbel_cdf_limit, rate_I
from .errors import InvalidArgumentError, RegimeError
from .sampling import SeedSpec, eigenvalues, extremal_stats, kostlan_sample_moduli, sample_ginibre

Z95 = 1.959963984540054
SMALL_COUNT = 30
RECORD_FIELDS = ("radius", "rightmost", "real_max", "complex_max_modulus", "real_count")


def default_workers() -> int:
    raw = os.environ.get("WORKERS")
    if not raw:
        return 1
    try:
        w = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"WORKERS must be a positive integer, got {raw!r}") from None
    if w < 1:
        raise InvalidArgumentError(f"WORKERS must be a positive integer, got {raw!r}")
    return w


# ---------------------------------------------------------------------------
# estimates


@dataclass(frozen=True)
class ProbEstimate:
    hits: int
    trials: int
    p_hat: float
    ci95: tuple
    method: str

    @classmethod
    def from_counts(cls, hits: int, trials: int) -> "ProbEstimate":
        if trials < 1 or not 0 <= hits <= trials:
            raise InvalidArgumentError("need 0 <= hits <= trials and trials >= 1")
        p = hits / trials
        if hits < SMALL_COUNT or trials - hits < SMALL_COUNT:
            z2 = Z95 * Z95
            denom = 1.0 + z2 / trials
            centre = (p + z2 / (2.0 * trials)) / denom
            half = Z95 * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
            lo, hi, method = centre - half, centre + half, "wilson"
        else:
            half = Z95 * math.sqrt(p * (1.0 - p) / trials)
            lo, hi, method = p - half, p + half, "normal"
        return cls(hits, trials, p, (max(0.0, min(lo, p)), min(1.0, max(hi, p))), method)

    @property
    def se(self) -> float:
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.trials)

    @property
    def log_p(self) -> float:
        return math.log(self.p_hat) if self.hits else -math.inf

    def covers(self, p: float) -> bool:
        return self.ci95[0] <= p <= self.ci95[1]


# ---------------------------------------------------------------------------
# trial runner


def _trial_extremal(beta, n, master_seed, index):
    seed = SeedSpec(master_seed, index)
    spec = eigenvalues(sample_ginibre(beta, n, seed), beta, seed)
    s = extremal_stats(spec)
    nan = math.nan
    return (
        s.radius,
        s.rightmost,
        nan if s.real_max is None else s.real_max,
        nan if s.complex_max_modulus is None else s.complex_max_modulus,
        nan if s.real_count is None else float(s.real_count),
    )


def _trial_kostlan(n, master_seed, index):
    r = float(kostlan_sample_moduli(n, SeedSpec(master_seed, index)).max())
    return (r, math.nan, math.nan, math.nan, math.nan)


def _trial_kostlan_count(n, t, master_seed, index):
    return float(np.count_nonzero(kostlan_sample_moduli(n, SeedSpec(master_seed, index)) >= t))


def _run_block(func, args, master_seed, lo, hi):
    return [func(*args, master_seed, i) for i in range(lo, hi)]


def run_trials(func, args, trials: int, master_seed: int, workers: int | None = None, start: int = 0):
    """``[func(*args, master_seed, i) for i in range(start, start + trials)]``, possibly in parallel."""
    if trials < 1:
        raise InvalidArgumentError("trials must be positive")
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise InvalidArgumentError("workers must be positive")
    if workers == 1:
        return _run_block(func, args, master_seed, start, start + trials)
    nblocks = min(trials, 4 * workers)
    edges = np.linspace(start, start + trials, nblocks + 1).astype(int)
    out = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_block, func, args, master_seed, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]
        for f in futures:
            out.extend(f.result())
    return out


def sample_records(beta, n: int, trials: int, seed: int, workers: int | None = None, route: str = "matrix") -> np.ndarray:
    """``trials x 5`` array of extremal statistics (columns as ``RECORD_FIELDS``; NaN when absent)."""
    beta = as_beta(beta)
    if route == "kostlan":
        if beta != Beta.COMPLEX:
            raise InvalidArgumentError("the Kostlan route applies to the complex ensemble only")
        rows = run_trials(_trial_kostlan, (n,), trials, seed, workers)
    elif route == "matrix":
        rows = run_trials(_trial_extremal, (beta, n), trials, seed, workers)
    else:
        raise InvalidArgumentError(f"unknown route {route!r}")
    return np.asarray(rows, dtype=float).reshape(trials, len(RECORD_FIELDS))


def _check_route(q: et.TailQuery, route: str):
    if route == "kostlan" and not (q.ensemble == Beta.COMPLEX and q.statistic == "radius"):
        raise InvalidArgumentError("route=kostlan is valid only for the complex spectral radius")
    if route not in ("matrix", "kostlan"):
        raise InvalidArgumentError(f"unknown route {route!r}")


def estimate_tail(q: et.TailQuery, trials: int, seed: int, route: str = "matrix", workers: int | None = None) -> ProbEstimate:
    """Frequency estimate of ``P(statistic >= t)``."""
    _check_route(q, route)
    rec = sample_records(q.ensemble, q.n, trials, seed, workers, route)
    col = rec[:, RECORD_FIELDS.index(q.statistic)]
    hits = int(np.count_nonzero(col >= q.t))  # NaN (statistic absent) never counts
    return ProbEstimate.from_counts(hits, trials)


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    se: float
    trials: int


def _mean(values) -> MeanEstimate:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.inf
    return MeanEstimate(float(v.mean()), se, int(v.size))


def mc_expected_count_radius(n: int, t: float, trials: int, seed: int, workers: int | None = None) -> MeanEstimate:
    """Mean of ``#{k : |sigma_k| >= t}`` for the complex ensemble, Kostlan route."""
    return _mean(run_trials(_trial_kostlan_count, (n, t), trials, seed, workers))


def real_eigenvalue_count(n: int, trials: int, seed: int, workers: int | None = None) -> MeanEstimate:
    """Mean number of real eigenvalues of the real ensemble."""
    rec = sample_records(Beta.REAL, n, trials, seed, workers)
    return _mean(rec[:, RECORD_FIELDS.index("real_count")])


# ---------------------------------------------------------------------------
# large deviations


def target_beta(ensemble, stat: str) -> int:
    """Effective ``beta`` of the decay rate: real eigenvalues dominate the real ensemble
    except for the largest non-real modulus, which decays at the complex rate."""
    ensemble = as_beta(ensemble)
    if ensemble == Beta.COMPLEX or stat == "complex_max_modulus":
        return 2
    return 1


def ldp_prefactor(t: float) -> float:
    """``log C_t`` of ``E[count] ~ C_t n^(-1/2) exp(-n I_2(t))`` (complex radius)."""
    return math.log(t * t / (math.sqrt(2.0 * math.pi) * (t * t - 1.0) ** 2))


@dataclass(frozen=True)
class LdpRow:
    n: int
    minus_log_p_over_n: float
    rate_target: float
    gap: float
    route: str
    hits: int | None = None
    envelope_ok: bool | None = None
    flagged: bool = False


def ldp_curve(
    ensemble,
    stat: str,
    t: float,
    n_list,
    trials: int | None = None,
    seed: int = 0,
    workers: int | None = None,
    envelope_c: float | None = None,
) -> list[LdpRow]:
    """``-(1/n) log P(stat >= t)`` against the rate, for each ``n``.

    The complex spectral radius uses the exact Kostlan law; other queries
    need ``trials`` and are estimated by simulation.  On the exact route the
    gap is checked against ``[(1/2) log n - c, (3/2) log n + c] / n`` where
    ``c`` defaults to ``1 + |log C_t|``.
    """
    ensemble = as_beta(ensemble)
    stat = et.normalize_stat(stat)
    if not t >= 1:
        raise InvalidArgumentError("ldp_curve needs t >= 1")
    rate = rate_I(target_beta(ensemble, stat), t).rate
    exact = ensemble == Beta.COMPLEX and stat == "radius"
    if not exact and trials is None:
        raise InvalidArgumentError("a trial budget is required off the exact route")
    if envelope_c is None and exact and t > 1:
        envelope_c = 1.0 + abs(ldp_prefactor(t))
    rows = []
    for n in n_list:
        q = et.TailQuery(ensemble, stat, n, t)
        if exact:
            lp = et.kostlan_radius_tail(n, t).log_p
            val = -lp / n
            gap = val - rate
            ok = None
            if t > 1:
                lo = (0.5 * math.log(n) - envelope_c) / n
                hi = (1.5 * math.log(n) + envelope_c) / n
                ok = lo <= gap <= hi
            rows.append(LdpRow(n, val, rate, gap, "exact", None, ok, False))
        else:
            est = estimate_tail(q, trials, seed, "matrix", workers)
            if est.hits == 0:
                rows.append(LdpRow(n, math.nan, rate, math.nan, "mc", 0, None, True))
            else:
                val = -est.log_p / n
                rows.append(LdpRow(n, val, rate, val - rate, "mc", est.hits, None, False))
    return rows


# ---------------------------------------------------------------------------
# moderate deviations


@dataclass(frozen=True)
class MdpRow:
    n: int
    t: float
    d: float
    value: float
    target: float
    regime_ok: bool
    route: str


def mdp_scaling(
    ensemble,
    stat: str,
    d_exponent: float,
    t_grid,
    n_list,
    trials: int | None = None,
    seed: int = 0,
    workers: int | None = None,
    d_max: float = 0.2,
) -> list[MdpRow]:
    """``log P(stat >= 1 + t d_n) / (n d_n^2)`` with ``d_n = n^(-d_exponent)``; target ``-beta t^2``.

    ``regime_ok`` requires ``sqrt(log n / n) < d_n`` and ``t d_n <= d_max``.
    """
    ensemble = as_beta(ensemble)
    stat = et.normalize_stat(stat)
    if not 0 < d_exponent < 0.5:
        raise InvalidArgumentError("d_exponent must lie in (0, 1/2)")
    beta = target_beta(ensemble, stat)
    exact = ensemble == Beta.COMPLEX and stat == "radius"
    if not exact and trials is None:
        raise InvalidArgumentError("a trial budget is required off the exact route")
    rows = []
    for n in n_list:
        d = n ** (-d_exponent)
        for t in t_grid:
            if not t > 0:
                raise InvalidArgumentError("t values must be positive")
            ok = d > math.sqrt(math.log(n) / n) and t * d <= d_max
            q = et.TailQuery(ensemble, stat, n, 1.0 + t * d)
            if exact:
                lp, route = et.kostlan_radius_tail(n, q.t).log_p, "exact"
            else:
                lp, route = estimate_tail(q, trials, seed, "matrix", workers).log_p, "mc"
            rows.append(MdpRow(n, float(t), d, lp / (n * d * d), -beta * t * t, ok, route))
    return rows


# ---------------------------------------------------------------------------
# Gumbel regime


@dataclass
class GumbelCheck:
    n: int
    trials: int
    mode: str
    ks_stat: float
    location_fit: float
    scale_fit: float
    fitted_ks: float
    gamma_fit: float
    grid: np.ndarray = field(repr=False, default=None)
    cdf: np.ndarray = field(repr=False, default=None)
    limit: np.ndarray = field(repr=False, default=None)
    centering: str = "literal"


def gumbel_limit_array(beta, g) -> np.ndarray:
    return np.array([gumbel_cdf_limit(beta, float(x)) for x in np.atleast_1d(g)])


def _radius_scaling(n: int):
    gamma = centering("radius", n).gamma
    return gamma, 1.0 + math.sqrt(gamma / (4.0 * n)), 1.0 / math.sqrt(4.0 * n * gamma)


def exact_gumbel_cdf(n: int, grid) -> np.ndarray:
    """Law of ``G_n = (radius - 1 - sqrt(gamma_n/4n)) sqrt(4 n gamma_n)`` on a grid, complex ensemble."""
    _, loc, scale = _radius_scaling(n)
    out = []
    for g in np.atleast_1d(grid):
        t = loc + float(g) * scale
        out.append(math.exp(et.kostlan_law(n, t).log_cdf) if t > 0 else 0.0)
    return np.asarray(out)


def _fit_sup(grid, cdf, beta):
    def loss(p):
        a, log_b = p
        z = (grid - a) / math.exp(log_b)
        return float(np.max(np.abs(cdf - np.exp(-0.5 * int(beta) * np.exp(-z)))))

    res = scipy.optimize.minimize(loss, x0=[0.0, 0.0], method="Nelder-Mead", options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 4000})
    return float(res.x[0]), float(math.exp(res.x[1])), float(res.fun)


def gumbel_check(
    n: int,
    mode: str = "exact_cdf",
    ensemble="complex",
    stat: str = "radius",
    trials: int = 0,
    seed: int = 0,
    workers: int | None = None,
    grid=None,
) -> GumbelCheck:
    """Distance between the rescaled extremal statistic and its Gumbel limit.

    ``exact_cdf`` (complex radius only) evaluates the Kostlan product CDF on a
    grid; ``ks_stat`` is the sup distance to ``exp(-e^-t)`` and the fitted
    location/scale are chosen to minimise that distance.

    ``mc`` samples the statistic.  For the radius the literal centering is
    used; for the rightmost eigenvalue, whose centering is negative at any
    reachable ``n``, location and scale are fitted by maximum likelihood and
    ``gamma_fit = 1 / (4 n scale^2)`` replaces the centering.
    """
    ensemble = as_beta(ensemble)
    stat = et.normalize_stat(stat)
    if stat not in ("radius", "rightmost"):
        raise InvalidArgumentError("Gumbel checks cover radius and rightmost")
    if grid is None:
        grid = np.linspace(-4.0, 12.0, 641)
    grid = np.asarray(grid, dtype=float)

    if mode == "exact_cdf":
        if ensemble != Beta.COMPLEX or stat != "radius":
            raise InvalidArgumentError("exact_cdf mode needs the complex spectral radius")
        if n < 200:
            raise RegimeError("Gumbel centering needs n >= 200")
        gamma, _, scale = _radius_scaling(n)
        cdf = exact_gumbel_cdf(n, grid)
        limit = gumbel_limit_array(ensemble, grid)
        ks = float(np.max(np.abs(cdf - limit)))
        a, b, fks = _fit_sup(grid, cdf, ensemble)
        gamma_fit = 1.0 / (4.0 * n * (b * scale) ** 2)
        return GumbelCheck(n, 0, mode, ks, a, b, fks, gamma_fit, grid, cdf, limit)

    if mode != "mc":
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    if trials < 2:
        raise InvalidArgumentError("mc mode needs at least 2 trials")
    route = "kostlan" if ensemble == Beta.COMPLEX and stat == "radius" else "matrix"
    x = sample_records(ensemble, n, trials, seed, workers, route)[:, RECORD_FIELDS.index(stat)]
    loc, sc = scipy.stats.gumbel_r.fit(x)
    fitted = scipy.stats.kstest(x, scipy.stats.gumbel_r(loc, sc).cdf).statistic
    gamma_fit = 1.0 / (4.0 * n * sc * sc)
    xs = np.sort(x)
    emp = np.arange(1, trials + 1) / trials
    if stat == "radius":
        if n < 200:
            raise RegimeError("Gumbel centering needs n >= 200")
        gamma, c_loc, c_scale = _radius_scaling(n)
        g = (xs - c_loc) / c_scale
        limit = gumbel_limit_array(ensemble, g)
        ks = float(scipy.stats.kstest(g, lambda v: gumbel_limit_array(ensemble, v)).statistic)
        return GumbelCheck(n, trials, mode, ks, (loc - c_loc) / c_scale, sc / c_scale, float(fitted), gamma_fit, g, emp, limit)
    # rightmost: fitted-location variant
    g = (xs - loc) / sc
    return GumbelCheck(n, trials, mode, float(fitted), float(loc), float(sc), float(fitted), gamma_fit, g, emp, np.exp(-np.exp(-g)), "fitted")


@dataclass(frozen=True)
class GumbelTailRow:
    s: float
    minus_log_tail: float
    prediction: float
    within: bool


def gumbel_tail_offsets(n: int, offsets, beta=2, tol: float = 1.0) -> list[GumbelTailRow]:
    """``-log(1 - F_n(s))`` at Gumbel offsets ``s`` (exact complex radius law).

    The limit law gives ``1 - F(s) ~ (beta/2) e^-s``, i.e. a prediction of
    ``s - log(beta/2)``.
    """
    beta = as_beta(beta)
    if beta != Beta.COMPLEX:
        raise InvalidArgumentError("the exact tail is available for the complex ensemble only")
    _, loc, scale = _radius_scaling(n)
    rows = []
    for s in offsets:
        lt = et.kostlan_law(n, loc + s * scale).log_tail
        pred = s - math.log(int(beta) / 2.0)
        rows.append(GumbelTailRow(float(s), -lt, pred, abs(-lt - pred) <= tol))
    return rows


# ---------------------------------------------------------------------------
# small deviations


@dataclass(frozen=True)
class SdpRow:
    n: int
    log_p: float
    log_bound: float
    holds: bool


def sdp_check(s: float, n_fit: int, n_list) -> tuple[float, list[SdpRow]]:
    """Fit ``C_s`` in ``P(radius >= 1 + s sqrt(gamma_n/4n)) <= (log n)^C_s n^(-(s^2-1)/2)``
    at ``n_fit`` (complex ensemble, exact law), then test the bound at each ``n``."""
    if not s > 1:
        raise InvalidArgumentError("s must exceed 1")

    def log_p(n):
        gamma = centering("radius", n).gamma
        return et.kostlan_radius_tail(n, 1.0 + s * math.sqrt(gamma / (4.0 * n))).log_p

    expo = 0.5 * (s * s - 1.0)
    c_s = (log_p(n_fit) + expo * math.log(n_fit)) / math.log(math.log(n_fit))
    rows = []
    for n in n_list:
        lp = log_p(n)
        bound = c_s * math.log(math.log(n)) - expo * math.log(n)
        rows.append(SdpRow(int(n), lp, bound, lp <= bound))
    return c_s, rows


# ---------------------------------------------------------------------------
# Saturn effect


@dataclass
class SaturnResult:
    n: int
    threshold: float
    trials: int
    real_exceed: int
    complex_exceed: int
    both: int
    records: np.ndarray = field(repr=False, default=None)  # trial, real_max, complex_max_modulus, rightmost


def saturn_counts(n: int, trials: int, threshold: float, seed: int, workers: int | None = None) -> SaturnResult:
    """Count trials whose largest real eigenvalue, largest non-real modulus, or both reach ``threshold``."""
    if not threshold > 1:
        raise InvalidArgumentError("threshold must exceed 1")
    rec = sample_records(Beta.REAL, n, trials, seed, workers)
    rmax = rec[:, RECORD_FIELDS.index("real_max")]
    cmax = rec[:, RECORD_FIELDS.index("complex_max_modulus")]
    r_hit = rmax >= threshold
    c_hit = cmax >= threshold
    out = np.column_stack((np.arange(trials, dtype=float), rmax, cmax, rec[:, RECORD_FIELDS.index("rightmost")]))
    return SaturnResult(
        n,
        threshold,
        trials,
        int(r_hit.sum()),
        int(c_hit.sum()),
        int((r_hit & c_hit).sum()),
        out,
    )
