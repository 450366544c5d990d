"""Deterministic tail quantities.

* The complex-ensemble spectral radius law from Kostlan's theorem: the
  moduli ``sqrt(2n)|sigma_i|`` are independent ``chi_{2k}``, so
  ``P(max|sigma| < t) = prod_k P(k, n t^2)``.
* Expected exceedance counts, as closed-form Q-sums or certified kernel
  quadrature.
* The first-moment bracket ``E[count]/n <= P(stat >= t) <= E[count]``.
* The three integration-by-parts integrals whose two-sided bounds drive the
  large-deviation upper and lower estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .deviation import Beta, as_beta
from .errors import InvalidArgumentError
from .quadrature import QuadResult, integrate_log_to_inf
from .specfun import LogValue, log_q_ladder

STATISTICS = ("radius", "rightmost", "real_max", "complex_max_modulus")
REAL_ONLY = ("real_max", "complex_max_modulus")
STAT_ALIASES = {"real": "real_max", "complex": "complex_max_modulus"}

# below this, exp(log Q) is so small that log(-log P) = log Q + Q/2 to full precision
_SMALL_LOG_Q = -30.0


def normalize_stat(stat: str) -> str:
    stat = STAT_ALIASES.get(stat, stat)
    if stat not in STATISTICS:
        raise InvalidArgumentError(f"unknown statistic {stat!r}; expected one of {', '.join(STATISTICS)}")
    return stat


@dataclass(frozen=True)
class TailQuery:
    """``P(statistic >= t)`` for an ``n x n`` Ginibre matrix."""

    ensemble: Beta
    statistic: str
    n: int
    t: float

    def __post_init__(self):
        object.__setattr__(self, "ensemble", as_beta(self.ensemble))
        object.__setattr__(self, "statistic", normalize_stat(self.statistic))
        if self.statistic in REAL_ONLY and self.ensemble != Beta.REAL:
            raise InvalidArgumentError(f"{self.statistic} is defined for the real ensemble only")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgumentError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        t = float(self.t)
        if not math.isfinite(t) or t <= 0:
            raise InvalidArgumentError(f"t must be finite and positive, got {self.t!r}")
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class LogProb:
    log_p: float
    kind: str  # exact | upper_bound | lower_bound | estimate
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.log_p > 0:
            object.__setattr__(self, "log_p", 0.0)

    @property
    def p(self) -> float:
        return min(1.0, math.exp(self.log_p))


@dataclass(frozen=True)
class ExpectedCount:
    """Expected number of eigenvalues in a region, in log form."""

    log_count: float
    route: str  # q_sum | quadrature
    log_error: float = -math.inf
    log_truncation: float = -math.inf

    @property
    def value(self) -> LogValue:
        return LogValue(self.log_count, 1) if self.log_count > -math.inf else LogValue.zero()

    @property
    def count(self) -> float:
        return math.exp(self.log_count)

    @classmethod
    def from_quad(cls, res: QuadResult) -> "ExpectedCount":
        return cls(res.log_value, "quadrature", res.log_error, res.log_truncation)


def _check_nt(n, t):
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n!r}")
    if not math.isfinite(t) or t <= 0:
        raise InvalidArgumentError(f"t must be finite and positive, got {t!r}")
    return int(n), float(t)


# ---------------------------------------------------------------------------
# Kostlan


@dataclass(frozen=True)
class KostlanLaw:
    """``log P(radius < t)`` and ``log P(radius >= t)`` from the chi product."""

    n: int
    t: float
    log_cdf: float
    log_tail: float
    log_union: float  # log sum_k Q(k, n t^2) = log E[count]


def _kostlan_window(n: int, x: float) -> int:
    """Smallest k worth keeping: ``Q(k, x) < exp(-x h((k-1)/x)) <= e^-800`` below it."""
    if x <= 800.0:
        return 1
    # Chernoff: Q(k, x) <= exp(-x h(lam)), h(lam) = lam log lam - lam + 1, lam = (k-1)/x < 1
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        h = mid * math.log(mid) - mid + 1.0 if mid > 0 else 1.0
        if x * h > 800.0:
            lo = mid
        else:
            hi = mid
    return max(1, min(n, int(lo * x)))


def kostlan_law(n: int, t: float) -> KostlanLaw:
    n, t = _check_nt(n, t)
    x = n * t * t
    k_lo = _kostlan_window(n, x)
    log_q, log_p = log_q_ladder(k_lo, n, x)
    # L_k = -log P(k, x), carried as log L_k
    q = np.exp(log_q)
    with np.errstate(divide="ignore"):
        log_l = np.where(
            log_q < _SMALL_LOG_Q,
            log_q + 0.5 * q,
            np.log(np.where(q < 0.5, -np.log1p(-np.minimum(q, 0.5)), -log_p)),
        )
    log_u = float(np.logaddexp.reduce(log_l))  # log(-log cdf)
    log_cdf = -math.exp(log_u) if log_u < 709.0 else -math.inf
    if log_u < -40.0:
        log_tail = log_u
    else:
        log_tail = math.log(-math.expm1(log_cdf))
    return KostlanLaw(n, t, log_cdf, min(log_tail, 0.0), float(np.logaddexp.reduce(log_q)))


def kostlan_radius_tail(n: int, t: float) -> LogProb:
    """Exact ``P(max |sigma_i| >= t)`` for the complex ensemble.

    The product ``prod_k P(k, n t^2)`` is summed as ``-sum_k log P(k, n t^2)``
    with each term formed from ``log Q`` directly when ``Q`` is small, so the
    complement stays accurate deep in the tail.  The union bound ``sum Q`` and
    its second-order lower bound ``sum Q - (sum Q)^2 / 2`` are attached.

    >>> round(kostlan_radius_tail(1, 1.0).p, 7)
    0.3678794
    """
    law = kostlan_law(n, t)
    s = law.log_union
    info = {"log_union_upper": s}
    if s < 0:
        info["log_union_lower"] = s + math.log1p(-0.5 * math.exp(s))
    return LogProb(law.log_tail, "exact", info)


def kostlan_log_cdf(n: int, t: float) -> float:
    return kostlan_law(n, t).log_cdf


# ---------------------------------------------------------------------------
# expected counts


def complex_count_radius_qsum(n: int, t: float) -> float:
    """``log sum_{k=1}^n Q(k, n t^2)``."""
    n, t = _check_nt(n, t)
    log_q, _ = log_q_ladder(1, n, n * t * t)
    return float(np.logaddexp.reduce(log_q))


def expected_count_radius(beta, n: int, t: float) -> ExpectedCount:
    """``E #{i : |sigma_i| >= t}``."""
    beta = as_beta(beta)
    n, t = _check_nt(n, t)
    if beta == Beta.COMPLEX:
        return ExpectedCount(complex_count_radius_qsum(n, t), "q_sum")
    return ExpectedCount.from_quad(kernels.real_ensemble_count_quad(n, t, "radius"))


def expected_count_rightmost(beta, n: int, t: float) -> ExpectedCount:
    """``E #{i : Re sigma_i >= t}``, ``t > 0``."""
    beta = as_beta(beta)
    n, t = _check_nt(n, t)
    if beta == Beta.COMPLEX:
        return ExpectedCount.from_quad(kernels.complex_count_rightmost_quad(n, t))
    return ExpectedCount.from_quad(kernels.real_ensemble_count_quad(n, t, "rightmost"))


def expected_count(q: TailQuery) -> ExpectedCount:
    """Expected number of eigenvalues that exceed ``q.t`` in the sense of ``q.statistic``."""
    if q.statistic == "radius":
        return expected_count_radius(q.ensemble, q.n, q.t)
    if q.statistic == "rightmost":
        return expected_count_rightmost(q.ensemble, q.n, q.t)
    return ExpectedCount.from_quad(kernels.real_ensemble_count_quad(q.n, q.t, q.statistic))


def exact_tail(q: TailQuery) -> LogProb | None:
    """Closed-form tail when one exists (complex ensemble, radius)."""
    if q.ensemble == Beta.COMPLEX and q.statistic == "radius":
        return kostlan_radius_tail(q.n, q.t)
    return None


@dataclass(frozen=True)
class TailBracket:
    lower: LogProb
    upper: LogProb
    count: ExpectedCount
    exact: LogProb | None = None

    def contains(self, p: float, slack: float = 0.0) -> bool:
        return self.lower.p - slack <= p <= self.upper.p + slack


def tail_bracket(q: TailQuery) -> TailBracket:
    """First-moment bracket ``E/n <= P(stat >= t) <= min(E, exact, 1)``."""
    count = expected_count(q)
    lower = LogProb(min(count.log_count - math.log(q.n), 0.0), "lower_bound")
    exact = exact_tail(q)
    up = min(count.log_count, 0.0)
    if exact is not None:
        up = min(up, exact.log_p)
    upper = LogProb(up, "upper_bound")
    return TailBracket(lower, upper, count, exact)


# ---------------------------------------------------------------------------
# integration-by-parts brackets

IBP_KINDS = ("radial", "planar", "real_line")


def _ibp_setup(kind: str, n: int, t: float):
    if kind == "radial":
        # int_t^inf r/(r^2-1) exp(-n(r^2 - 2 log r)) dr

        def logf(r):
            return np.log(r) - np.log(r * r - 1.0) - n * (r * r - 2.0 * np.log(r))

        def decay(R):
            return 2.0 * n * (R - 1.0 / R)

    elif kind == "planar":
        # int_t^inf 1/(r^2-1) exp(-n(r^2 - 2 log r)) dr

        def logf(r):
            return -np.log(r * r - 1.0) - n * (r * r - 2.0 * np.log(r))

        def decay(R):
            return 2.0 * n * (R - 1.0 / R)

    elif kind == "real_line":
        # int_t^inf 1/x exp(-(n/2)(x^2 - 2 log x)) dx

        def logf(r):
            return -np.log(r) - 0.5 * n * (r * r - 2.0 * np.log(r))

        def decay(R):
            return n * (R - 1.0 / R)

    else:
        raise InvalidArgumentError(f"kind must be one of {IBP_KINDS}")
    return logf, decay


def ibp_integral(kind: str, n: int, t: float, rtol: float = 1e-12) -> QuadResult:
    """Quadrature value of an integration-by-parts integral (``t > 1``).

    The integrand's log-derivative is at most ``-decay(R)`` beyond ``R``,
    which certifies the truncation.
    """
    if not t > 1:
        raise InvalidArgumentError("the integrals need t > 1")
    logf, decay = _ibp_setup(kind, n, t)

    def log_tail(R):
        return float(logf(np.float64(R))) - math.log(decay(R))

    width = 1.0 / (n * (t - 1.0 / t)) + 1.0 / math.sqrt(n)
    return integrate_log_to_inf(logf, t, log_tail, rtol=rtol, scale=width)


def ibp_bounds(kind: str, n: int, t: float):
    """``(log lower, log upper)``; ``log lower`` is ``-inf`` when the bracket factor is nonpositive."""
    if not t > 1:
        raise InvalidArgumentError("the bounds need t > 1")
    t2 = t * t
    g = t2 - 1.0
    if kind == "radial":
        log_up = math.log(t2) - n * (t2 - 2.0 * math.log(t)) - math.log(2.0 * n * g * g)
        factor = 1.0 - (t2 + 1.0) / (n * g * g)
    elif kind == "planar":
        log_up = math.log(t) - n * (t2 - 2.0 * math.log(t)) - math.log(2.0 * n * g * g)
        factor = 1.0 - (3.0 * t2 + 1.0) / (2.0 * n * g * g)
    elif kind == "real_line":
        log_up = -0.5 * n * (t2 - 2.0 * math.log(t)) - math.log(n * g)
        factor = 1.0 - 2.0 * t2 / (n * g * g)
    else:
        raise InvalidArgumentError(f"kind must be one of {IBP_KINDS}")
    log_lo = log_up + math.log(factor) if factor > 0 else -math.inf
    return log_lo, log_up
