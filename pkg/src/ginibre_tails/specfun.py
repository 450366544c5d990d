"""Log-space special functions.

Everything here works with natural logarithms so that quantities such as
``exp(-n (t**2 - 2 log t - 1))`` stay representable for ``n`` in the
thousands.  The central pieces are

* the regularized incomplete gamma functions ``P(a, x)`` and ``Q(a, x)``
  (series below the transition, Lentz continued fraction above it, both
  scaled by a cancellation-free prefactor),
* the truncated exponential ``e_n(z) = sum_{k=0}^n z**k / k!`` by direct
  summation around its largest term, and
* the uniform large-``n`` approximation of ``exp(-n t) e_n(n t)`` built on
  ``erfc``.

``exp(-z) e_{n-1}(z) == Q(n, z)`` ties the two summation routes together and
is exercised heavily by the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidArgumentError, NumericalError, RegimeError

__all__ = [
    "LogValue",
    "AsymptoticRegime",
    "log1pmx",
    "stirlerr",
    "log_gamma_prefix",
    "log_reg_gamma_p",
    "log_reg_gamma_q",
    "reg_gamma_p",
    "reg_gamma_q",
    "log_q_ladder",
    "trunc_exp_log",
    "trunc_exp_scaled_log",
    "trunc_exp_asymptotic",
    "erfc",
    "erfcx",
    "log_erfc",
    "mu",
    "EXACT_SUMMATION_MAX_N",
]

LOG_2PI = math.log(2.0 * math.pi)
EXACT_SUMMATION_MAX_N = 100_000

_CF_TINY = 1e-300
_SERIES_TOL = 1e-17
_CF_TOL = 2e-16


@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_abs)``.

    ``sign == 0`` encodes an exact zero; ``log_abs`` is then ``-inf``.
    """

    log_abs: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise InvalidArgumentError(f"sign must be -1, 0 or 1, got {self.sign}")
        if self.sign == 0 and self.log_abs != -math.inf:
            object.__setattr__(self, "log_abs", -math.inf)
        if self.sign != 0 and self.log_abs == -math.inf:
            object.__setattr__(self, "sign", 0)

    @classmethod
    def zero(cls) -> LogValue:
        return cls(-math.inf, 0)

    @classmethod
    def from_float(cls, x: float) -> LogValue:
        if not math.isfinite(x):
            raise InvalidArgumentError(f"cannot represent {x!r} as a LogValue")
        if x == 0.0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def value(self) -> float:
        """The represented number (may under- or overflow)."""
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def probability(self) -> float:
        """The represented number clamped to ``[0, 1]``."""
        if self.sign <= 0:
            return 0.0
        return min(1.0, math.exp(min(self.log_abs, 0.0)))

    def __float__(self) -> float:
        return self.value()

    def __neg__(self) -> LogValue:
        return LogValue(self.log_abs, -self.sign)

    def __mul__(self, other: LogValue) -> LogValue:
        if not isinstance(other, LogValue):
            return NotImplemented
        if self.sign == 0 or other.sign == 0:
            return LogValue.zero()
        return LogValue(self.log_abs + other.log_abs, self.sign * other.sign)

    def __truediv__(self, other: LogValue) -> LogValue:
        if not isinstance(other, LogValue):
            return NotImplemented
        if other.sign == 0:
            raise ZeroDivisionError("LogValue division by zero")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(self.log_abs - other.log_abs, self.sign * other.sign)

    def __add__(self, other: LogValue) -> LogValue:
        if not isinstance(other, LogValue):
            return NotImplemented
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        if self.sign == other.sign:
            return LogValue(float(np.logaddexp(self.log_abs, other.log_abs)), self.sign)
        big, small = (self, other) if self.log_abs >= other.log_abs else (other, self)
        delta = small.log_abs - big.log_abs
        if delta == 0.0:
            return LogValue.zero()
        return LogValue(big.log_abs + math.log1p(-math.exp(delta)), big.sign)

    def __sub__(self, other: LogValue) -> LogValue:
        if not isinstance(other, LogValue):
            return NotImplemented
        return self + (-other)


@dataclass(frozen=True)
class AsymptoticRegime:
    t: float
    n: int
    mu: float


# ---------------------------------------------------------------------------
# elementary helpers


def log1pmx(x):
    """``log(1 + x) - x`` without cancellation near ``x = 0``.

    Uses ``log(1+x) = 2 atanh(u)`` with ``u = x / (2 + x)`` for ``|x| <= 0.5``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) <= 0.5
    big = ~small
    with np.errstate(divide="ignore", invalid="ignore"):
        out[big] = np.log1p(x[big]) - x[big]
    xs = x[small]
    u = xs / (2.0 + xs)
    u2 = u * u
    # 2*atanh(u) - x = -2u^2/(1-u) + 2 sum_{j>=1} u^(2j+1)/(2j+1)
    acc = np.zeros_like(u)
    power = u * u2
    for j in range(1, 24):
        acc += power / (2 * j + 1)
        power = power * u2
    out[small] = -2.0 * u2 / (1.0 - u) + 2.0 * acc
    return out[()] if out.ndim == 0 else out


_STIRLING_COEFFS = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)


def stirlerr(a):
    """``log Gamma(a) - [(a - 1/2) log a - a + log(2 pi) / 2]`` for ``a > 0``."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    large = a >= 10.0
    al = a[large]
    inv = 1.0 / al
    inv2 = inv * inv
    acc = np.zeros_like(al)
    for c in reversed(_STIRLING_COEFFS):
        acc = acc * inv2 + c
    out[large] = acc * inv
    asmall = a[~large]
    out[~large] = special.gammaln(asmall) - ((asmall - 0.5) * np.log(asmall) - asmall + 0.5 * LOG_2PI)
    return out[()] if out.ndim == 0 else out


def log_gamma_prefix(a, x):
    """``log(x**a * exp(-x) / Gamma(a))`` evaluated without cancellation.

    Written as ``-a * (lam - 1 - log lam) + log(a / 2 pi) / 2 - stirlerr(a)``
    with ``lam = x / a``; the absolute error stays near machine epsilon even
    when ``a log x`` and ``x`` are individually of order ``1e7``.
    """
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    out = np.full(a.shape, -np.inf)
    pos = x > 0
    ap, xp = a[pos], x[pos]
    lam = xp / ap
    dev = -log1pmx(lam - 1.0)
    out[pos] = -ap * dev + 0.5 * np.log(ap / (2.0 * math.pi)) - stirlerr(ap)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# regularized incomplete gamma


def _check_gamma_args(a, x):
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(x))):
        raise InvalidArgumentError("incomplete gamma arguments must be finite")
    if np.any(a <= 0):
        raise InvalidArgumentError("incomplete gamma shape must be positive")
    if np.any(x < 0):
        raise InvalidArgumentError("incomplete gamma argument must be nonnegative")
    return np.broadcast_arrays(a, x)


def _max_iterations(a):
    return int(1000 + 60 * math.sqrt(float(np.max(a, initial=1.0))))


def _log_series_p(a, x):
    """log P(a, x) by the power series; intended for ``x < a + 1``."""
    total = np.ones_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    j = 0
    limit = _max_iterations(a)
    while np.any(active):
        j += 1
        if j > limit:
            raise NumericalError("incomplete gamma series did not converge")
        term[active] *= x[active] / (a[active] + j)
        total[active] += term[active]
        active &= term > _SERIES_TOL * total
    return log_gamma_prefix(a, x) - np.log(a) + np.log(total)


def _log_cf_q(a, x):
    """log Q(a, x) by the modified Lentz continued fraction; ``x >= a + 1``."""
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _CF_TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    i = 0
    limit = _max_iterations(a)
    while np.any(active):
        i += 1
        if i > limit:
            raise NumericalError("incomplete gamma continued fraction did not converge")
        an = -i * (i - a[active])
        b[active] += 2.0
        dd = an * d[active] + b[active]
        dd = np.where(np.abs(dd) < _CF_TINY, _CF_TINY, dd)
        cc = b[active] + an / c[active]
        cc = np.where(np.abs(cc) < _CF_TINY, _CF_TINY, cc)
        dd = 1.0 / dd
        delta = dd * cc
        d[active] = dd
        c[active] = cc
        h[active] *= delta
        done = np.abs(delta - 1.0) < _CF_TOL
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return log_gamma_prefix(a, x) + np.log(h)


def _log_pq(a, x):
    a, x = _check_gamma_args(a, x)
    a = np.array(a, dtype=float)
    x = np.array(x, dtype=float)
    log_p = np.empty(a.shape)
    log_q = np.empty(a.shape)
    zero = x == 0
    log_p[zero] = -np.inf
    log_q[zero] = 0.0
    ser = (~zero) & (x < a + 1.0)
    cf = (~zero) & ~ser
    if np.any(ser):
        lp = _log_series_p(a[ser], x[ser])
        log_p[ser] = lp
        log_q[ser] = np.log1p(-np.exp(lp))
    if np.any(cf):
        lq = _log_cf_q(a[cf], x[cf])
        log_q[cf] = lq
        log_p[cf] = np.log1p(-np.exp(lq))
    return log_p, log_q


def _unwrap(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def log_reg_gamma_q(a, x):
    """Natural log of the upper regularized incomplete gamma ``Q(a, x)``."""
    return _unwrap(_log_pq(a, x)[1])


def log_reg_gamma_p(a, x):
    """Natural log of the lower regularized incomplete gamma ``P(a, x)``."""
    return _unwrap(_log_pq(a, x)[0])


def reg_gamma_q(k, x):
    """Upper regularized incomplete gamma ``Gamma(k, x) / Gamma(k)``.

    >>> round(reg_gamma_q(1, 2.0), 10)
    0.1353352832
    """
    return _unwrap(np.exp(_log_pq(k, x)[1]))


def reg_gamma_p(k, x):
    """Lower regularized incomplete gamma, computed without ``1 - Q``."""
    return _unwrap(np.exp(_log_pq(k, x)[0]))


def log_q_ladder(k_lo: int, k_hi: int, x: float):
    """``log Q(k, x)`` and ``log P(k, x)`` for every integer ``k_lo <= k <= k_hi``.

    Only two scalar incomplete-gamma evaluations are made; the rest follows
    from ``Q(k+1, x) = Q(k, x) + x**k exp(-x) / k!`` accumulated upward and
    the mirror relation for ``P`` accumulated downward, all in log space.
    """
    if k_lo < 1 or k_hi < k_lo:
        raise InvalidArgumentError("need 1 <= k_lo <= k_hi")
    if not math.isfinite(x) or x < 0:
        raise InvalidArgumentError("x must be finite and nonnegative")
    size = k_hi - k_lo + 1
    if x == 0:
        return np.zeros(size), np.full(size, -np.inf)
    j = np.arange(k_lo, k_hi, dtype=float)
    log_terms = log_gamma_prefix(j + 1.0, x) - math.log(x)
    log_q = np.logaddexp.accumulate(np.concatenate(([log_reg_gamma_q(k_lo, x)], log_terms)))
    rev = np.concatenate(([log_reg_gamma_p(k_hi, x)], log_terms[::-1]))
    log_p = np.logaddexp.accumulate(rev)[::-1]
    return log_q, log_p


# ---------------------------------------------------------------------------
# truncated exponential


def _check_trunc_args(n, z):
    if int(n) != n or n < 0:
        raise InvalidArgumentError(f"degree must be a nonnegative integer, got {n!r}")
    if not math.isfinite(z):
        raise InvalidArgumentError(f"argument must be finite, got {z!r}")
    if z < 0:
        raise InvalidArgumentError("only nonnegative arguments are supported")
    return int(n), float(z)


def trunc_exp_scaled_log(n: int, z: float) -> float:
    """``log(exp(-z) * sum_{k=0}^n z**k / k!)`` by direct summation.

    The sum is taken relative to its largest term; neighbouring term ratios
    ``z / j`` are accumulated as logarithms so no factorial is formed.
    """
    n, z = _check_trunc_args(n, z)
    if z == 0.0:
        return 0.0
    peak = min(n, int(math.floor(z)))
    width = int(12.0 * math.sqrt(z + 1.0)) + 20
    while True:
        lo = max(0, peak - width)
        hi = min(n, peak + width)
        up = np.cumsum(np.log(z / np.arange(peak + 1, hi + 1, dtype=float)))
        down = np.cumsum(np.log(z / np.arange(peak, lo, -1, dtype=float)))
        edge_ok = (hi == n or up[-1] < -60.0) and (lo == 0 or down[-1] > 60.0)
        if edge_ok:
            break
        width *= 2
    offsets = np.concatenate((-down[::-1], [0.0], up))
    log_peak = float(log_gamma_prefix(peak + 1.0, z)) - math.log(z)
    return log_peak + math.log(math.fsum(np.exp(offsets)))


def trunc_exp_log(n: int, z: float, method: str = "exact") -> LogValue:
    """``log e_n(z)`` where ``e_n(z) = sum_{k=0}^n z**k / k!``.

    ``method="asymptotic"`` switches to the uniform erfc approximation, but
    only for ``n`` above ``EXACT_SUMMATION_MAX_N``; smaller degrees are
    always summed exactly.
    """
    n, z = _check_trunc_args(n, z)
    if method not in ("exact", "asymptotic"):
        raise InvalidArgumentError(f"unknown method {method!r}")
    if method == "asymptotic" and n > EXACT_SUMMATION_MAX_N and z > 0:
        approx = trunc_exp_asymptotic(n, z / n)
        return LogValue(z + approx.log_abs, approx.sign)
    return LogValue(z + trunc_exp_scaled_log(n, z), 1)


# ---------------------------------------------------------------------------
# error functions


def erfc(x):
    """Complementary error function."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("erfc argument must be finite")
    return _unwrap(special.erfc(x))


def erfcx(x):
    """Scaled complementary error function ``exp(x**2) erfc(x)``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("erfcx argument must be finite")
    return _unwrap(special.erfcx(x))


def log_erfc(x):
    """``log erfc(x)``, finite for arbitrarily large positive ``x``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("log_erfc argument must be finite")
    with np.errstate(divide="ignore"):
        out = np.where(x > 0, np.log(special.erfcx(np.maximum(x, 0.0))) - x * x, np.log(special.erfc(x)))
    return _unwrap(out)


# ---------------------------------------------------------------------------
# large-n approximation of the truncated exponential


def mu(t):
    """``|t - 1 - log t| ** 0.5``, accurate through ``t = 1``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise InvalidArgumentError("t must be positive")
    return _unwrap(np.sqrt(np.abs(-log1pmx(t - 1.0))))


def asymptotic_regime(n: int, t: float) -> AsymptoticRegime:
    return AsymptoticRegime(t=float(t), n=int(n), mu=float(mu(t)))


def trunc_exp_asymptotic(n: int, t: float, guard: float = 10.0) -> LogValue:
    """Large-``n`` approximation of ``exp(-n t) e_n(n t)``.

    Returns ``1{t<1} + mu t / (sqrt(2) (t - 1)) * erfc(sqrt(n) mu)`` as a
    LogValue.  Points with ``|t - 1| < guard / sqrt(n)`` raise RegimeError:
    the prefactor there is a 0/0 that the exact sum handles better.
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError("n must be a positive integer")
    if not math.isfinite(t) or t <= 0:
        raise InvalidArgumentError("t must be positive and finite")
    if abs(t - 1.0) < guard / math.sqrt(n):
        raise RegimeError(
            f"t={t} is within {guard}/sqrt(n) of 1; use exact summation (trunc_exp_log)"
        )
    m = float(mu(t))
    log_corr = math.log(m * t / (math.sqrt(2.0) * abs(t - 1.0))) + float(log_erfc(math.sqrt(n) * m))
    corr = LogValue(log_corr, 1 if t > 1 else -1)
    if t > 1:
        return corr
    return LogValue(0.0, 1) + corr
