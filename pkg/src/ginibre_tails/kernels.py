"""One-point intensities of Ginibre eigenvalues and their region integrals.

Complex ensemble::

    K_n(z) = (n / pi) Q(n, n |z|^2)

Real ensemble, complex eigenvalues in the open upper half plane::

    S_cc(z) = sqrt(2/pi) n^(3/2) |Im z| erfcx(sqrt(2n) |Im z|) Q(n-1, n |z|^2)

Real ensemble, real eigenvalues (density per unit length)::

    S_rr(x) = sqrt(n / 2 pi) Q(n-1, n x^2)
              + exp[(n/2) log n + (n-1) log|x| - n x^2 / 2 - (n/2) log 2
                    - log Gamma(n/2)] * P((n-1)/2, n x^2 / 2)

``exp(-z) e_{n-1}(z) = Q(n, z)`` replaces the truncated exponential
throughout, and the ``exp(2n Im(z)^2) erfc(...)`` product of S_cc is carried
by ``erfcx``.  S_cc integrates over the upper half plane to the expected
number of conjugate pairs, so ``2 * int_UHP S_cc + int_R S_rr = n``.

Region integrals are computed in polar coordinates.  The angular factor of
S_cc is integrated on panels graded geometrically toward ``theta = 0``,
where ``h(y) = y erfcx(sqrt(2n) y)`` turns over on the scale ``1/sqrt(2n)``.
Semi-infinite radial integrals are truncated with explicit tail bounds
derived from the hazard-rate inequality ``Q(a, x) <= x^(a-1) e^(-x) /
(Gamma(a) (1 - (a-1)/x))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .quadrature import QuadResult, _gl_rule, integrate_log, integrate_log_to_inf, logsum_results
from .specfun import LogValue, erfcx, log1pmx, log_reg_gamma_p, log_reg_gamma_q, stirlerr

LOG_PI = math.log(math.pi)
QUAD_RTOL = 1e-11


@dataclass(frozen=True)
class IntensityValue:
    at: complex | float
    value: LogValue

    def __float__(self) -> float:
        return self.value.value()


def _check_n(n, minimum):
    if int(n) != n or n < minimum:
        raise InvalidArgumentError(f"n must be an integer >= {minimum}, got {n!r}")
    return int(n)


def _finite(*vals):
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("kernel arguments must be finite")


# ---------------------------------------------------------------------------
# vectorized log intensities


def log_k_complex(n: int, r):
    """``log K_n`` as a function of the modulus ``r = |z|``."""
    r = np.asarray(r, dtype=float)
    return math.log(n / math.pi) + log_reg_gamma_q(n, n * r * r)


def log_s_cc(n: int, x, y):
    """``log S_cc(x + iy)``; ``-inf`` on the real axis."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    ay = np.abs(y)
    with np.errstate(divide="ignore"):
        out = (
            0.5 * math.log(2.0)
            + 1.5 * math.log(n)
            - 0.5 * LOG_PI
            + np.log(ay)
            + np.log(erfcx(math.sqrt(2.0 * n) * ay))
            + log_reg_gamma_q(n - 1, n * (x * x + y * y))
        )
    return out


def log_s_rr(n: int, x):
    """``log S_rr(x)`` built from log-gamma pieces only."""
    x = np.abs(np.asarray(x, dtype=float))
    term1 = 0.5 * math.log(n / (2.0 * math.pi)) + log_reg_gamma_q(n - 1, n * x * x)
    term2 = np.full(x.shape, -np.inf)
    nz = x > 0
    if np.any(nz):
        xn = x[nz]
        shape = -log1pmx(xn * xn - 1.0)
        term2[nz] = (
            0.5 * math.log(n / (4.0 * math.pi))
            - float(stirlerr(n / 2.0))
            - 0.5 * n * shape
            - np.log(xn)
            + log_reg_gamma_p((n - 1) / 2.0, n * xn * xn / 2.0)
        )
    out = np.logaddexp(term1, term2)
    return out[()] if out.ndim == 0 else out


def log_s_rr_terms(n: int, x: float):
    """The two summands of ``S_rr(x)`` separately, as logs."""
    x = abs(float(x))
    term1 = 0.5 * math.log(n / (2.0 * math.pi)) + log_reg_gamma_q(n - 1, n * x * x)
    if x == 0:
        return term1, -math.inf
    term2 = (
        0.5 * math.log(n / (4.0 * math.pi))
        - float(stirlerr(n / 2.0))
        - 0.5 * n * float(-log1pmx(x * x - 1.0))
        - math.log(x)
        + log_reg_gamma_p((n - 1) / 2.0, n * x * x / 2.0)
    )
    return term1, term2


# ---------------------------------------------------------------------------
# point evaluators


def k_complex(n: int, z: complex) -> IntensityValue:
    """Complex-ensemble intensity ``K_n(z, z)``; depends on ``|z|`` only."""
    n = _check_n(n, 1)
    z = complex(z)
    _finite(z.real, z.imag)
    return IntensityValue(z, LogValue(float(log_k_complex(n, abs(z))), 1))


def s_complex_real_ensemble(n: int, z: complex) -> IntensityValue:
    """Real-ensemble intensity of complex eigenvalues at ``z`` (``Im z != 0``)."""
    n = _check_n(n, 2)
    z = complex(z)
    _finite(z.real, z.imag)
    if z.imag == 0:
        raise InvalidArgumentError("S_cc is defined off the real axis; use s_real_real_ensemble")
    return IntensityValue(z, LogValue(float(log_s_cc(n, z.real, z.imag)), 1))


def s_real_real_ensemble(n: int, x: float) -> IntensityValue:
    """Real-ensemble intensity of real eigenvalues at ``x``."""
    n = _check_n(n, 3)
    _finite(x)
    return IntensityValue(float(x), LogValue(float(log_s_rr(n, x)), 1))


# ---------------------------------------------------------------------------
# tail bounds used to certify truncation


def _log_tail_rq(a: float, n: int, R: float, log_const: float) -> float:
    """Bound on ``log int_R^inf c r Q(a, n r^2) dr`` (``a >= 1``)."""
    lam = 2.0 * n * R - (2.0 * a - 1.0) / R
    if lam <= 0:
        return math.inf
    return log_const + math.log(R) + log_reg_gamma_q(a, n * R * R) - math.log(lam)


def _log_tail_s_rr(n: int, R: float) -> float:
    """Bound on ``log int_R^inf S_rr``; each summand has a log-derivative <= -lam."""
    lam1 = 2.0 * n * R - 2.0 * (n - 2) / R
    lam2 = n * R - (n - 1) / R
    if lam1 <= 0 or lam2 <= 0:
        return math.inf
    t1 = 0.5 * math.log(n / (2.0 * math.pi)) + log_reg_gamma_q(n - 1, n * R * R) - math.log(lam1)
    t2 = (
        0.5 * math.log(n / (4.0 * math.pi))
        - float(stirlerr(n / 2.0))
        - 0.5 * n * float(-log1pmx(R * R - 1.0))
        - math.log(R)
        - math.log(lam2)
    )
    return float(np.logaddexp(t1, t2))


def _scale(n: int) -> float:
    return 4.0 / math.sqrt(n)


def _breaks(n: int, t: float):
    w = 1.0 / math.sqrt(n)
    return [p for p in (1.0 - 3 * w, 1.0 - w, 1.0, 1.0 + w, 1.0 + 3 * w) if p > t]


# ---------------------------------------------------------------------------
# complex ensemble integrals


def complex_count_radius_quad(n: int, t: float, rtol: float = QUAD_RTOL) -> QuadResult:
    """``int_{|z| >= t} K_n d^2z`` by radial quadrature."""
    n = _check_n(n, 1)
    if t < 0:
        raise InvalidArgumentError("t must be nonnegative")
    log2n = math.log(2.0 * n)

    def logf(r):
        with np.errstate(divide="ignore"):
            return log2n + np.log(r) + log_reg_gamma_q(n, n * r * r)

    return integrate_log_to_inf(
        logf,
        t,
        lambda R: _log_tail_rq(n, n, R, log2n),
        rtol=rtol,
        scale=max(1.0 - t, 0.0) + _scale(n),
        breakpoints=_breaks(n, t),
    )


def complex_count_rightmost_quad(n: int, t: float, rtol: float = QUAD_RTOL) -> QuadResult:
    """``int_{Re z >= t} K_n d^2z`` via ``int_t^inf 2 arccos(t/r) r K_n(r) dr``.

    The substitution ``r = t + u^2`` removes the square-root edge at ``r = t``.
    """
    n = _check_n(n, 1)
    if not t > 0:
        raise InvalidArgumentError("rightmost counts need t > 0")
    log_c = math.log(2.0 * n / math.pi)

    def logf(u):
        r = t + u * u
        ang = np.arccos(np.minimum(t / r, 1.0))
        with np.errstate(divide="ignore"):
            return log_c + np.log(2.0 * u) + np.log(2.0 * ang) + np.log(r) + log_reg_gamma_q(n, n * r * r) - math.log(2.0)

    def log_tail(U):
        # 2 arccos <= pi, so the integrand is at most half the radial one
        return _log_tail_rq(n, n, t + U * U, math.log(n))

    u_breaks = [math.sqrt(p - t) for p in _breaks(n, t)]
    return integrate_log_to_inf(
        logf,
        0.0,
        log_tail,
        rtol=rtol,
        scale=math.sqrt(max(1.0 - t, 0.0) + _scale(n)),
        breakpoints=u_breaks,
    )


# ---------------------------------------------------------------------------
# real ensemble integrals


def real_line_count_quad(n: int, t: float, rtol: float = QUAD_RTOL) -> QuadResult:
    """``int_t^inf S_rr(x) dx`` for ``t >= 0`` (expected real eigenvalues above ``t``)."""
    n = _check_n(n, 3)
    if t < 0:
        raise InvalidArgumentError("use symmetry: t must be nonnegative")
    return integrate_log_to_inf(
        lambda x: log_s_rr(n, x),
        t,
        lambda R: _log_tail_s_rr(n, R),
        rtol=rtol,
        scale=max(1.0 - t, 0.0) + _scale(n),
        breakpoints=_breaks(n, t),
    )


def expected_real_count_quad(n: int, rtol: float = QUAD_RTOL) -> QuadResult:
    """``int_R S_rr``: expected number of real eigenvalues."""
    half = real_line_count_quad(n, 0.0, rtol=rtol)
    ln2 = math.log(2.0)
    return QuadResult(half.log_value + ln2, half.log_error + ln2, half.log_truncation + ln2, half.panels)


def _angular_factor(n: int, r: float, theta_max: float, m: int = 20):
    """``int_0^theta_max h(r sin th) d th`` with ``h(y) = y erfcx(sqrt(2n) y)``.

    Returns the value and an error estimate from a half-order rule.
    """
    if theta_max <= 0 or r <= 0:
        return 0.0, 0.0
    c = math.sqrt(2.0 * n)
    s = 0.25 / (c * r)
    edges = [0.0]
    e = s
    while e < theta_max:
        edges.append(e)
        e *= 2.0
    edges.append(theta_max)
    edges = np.asarray(edges)
    lo, hi = edges[:-1], edges[1:]
    half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
    xf, wf = _gl_rule(m)
    xc, wc = _gl_rule(m // 2)

    def rule(xg, wg):
        th = mid[:, None] + half[:, None] * xg[None, :]
        y = r * np.sin(th)
        vals = y * erfcx(c * y)
        return float(np.sum(half * (vals @ wg)))

    fine = rule(xf, wf)
    return fine, abs(fine - rule(xc, wc))


def _cc_prefactor(n: int) -> float:
    return 0.5 * math.log(2.0) + 1.5 * math.log(n) - 0.5 * LOG_PI


def upper_half_count_quad(n: int, t: float, region: str = "radius", rtol: float = QUAD_RTOL) -> QuadResult:
    """Expected number of upper-half-plane eigenvalues of the real ensemble in a region.

    ``region="radius"``: ``|z| >= t`` (``t >= 0``; ``t = 0`` is the whole half plane).
    ``region="rightmost"``: ``Re z >= t`` (``t > 0``).
    """
    n = _check_n(n, 2)
    log_a = _cc_prefactor(n)
    # h <= 1/(sqrt(2n) sqrt(pi)) gives the angular factor at most (pi/2)/sqrt(2 pi n) per quarter
    log_hmax = math.log(math.pi / math.sqrt(2.0 * math.pi * n))
    ang_err = []

    if region == "radius":
        if t < 0:
            raise InvalidArgumentError("t must be nonnegative")

        def logf(r):
            r = np.atleast_1d(r)
            ang = np.empty_like(r)
            for i, ri in enumerate(r):
                v, e = _angular_factor(n, ri, 0.5 * math.pi)
                ang[i] = 2.0 * v
                ang_err.append((2.0 * e, 2.0 * v))
            with np.errstate(divide="ignore"):
                return log_a + np.log(r) + np.log(ang) + log_reg_gamma_q(n - 1, n * r * r)

        res = integrate_log_to_inf(
            logf,
            t,
            lambda R: _log_tail_rq(n - 1, n, R, log_a + log_hmax),
            rtol=rtol,
            scale=max(1.0 - t, 0.0) + _scale(n),
            breakpoints=_breaks(n, t),
        )
    elif region == "rightmost":
        if not t > 0:
            raise InvalidArgumentError("rightmost region needs t > 0")

        def logf(u):
            u = np.atleast_1d(u)
            r = t + u * u
            ang = np.empty_like(r)
            for i, ri in enumerate(r):
                v, e = _angular_factor(n, ri, math.acos(min(t / ri, 1.0)))
                ang[i] = v
                ang_err.append((e, v))
            with np.errstate(divide="ignore"):
                return log_a + np.log(2.0 * u) + np.log(r) + np.log(ang) + log_reg_gamma_q(n - 1, n * r * r)

        res = integrate_log_to_inf(
            logf,
            0.0,
            lambda U: _log_tail_rq(n - 1, n, t + U * U, log_a + log_hmax),
            rtol=rtol,
            scale=math.sqrt(max(1.0 - t, 0.0) + _scale(n)),
            breakpoints=[math.sqrt(p - t) for p in _breaks(n, t)],
        )
    else:
        raise InvalidArgumentError(f"unknown region {region!r}")

    # fold the worst relative angular error into the reported bound
    worst = max((e / v for e, v in ang_err if v > 0), default=0.0)
    if worst > 0:
        extra = res.log_value + math.log(worst)
        res = QuadResult(res.log_value, float(np.logaddexp(res.log_error, extra)), res.log_truncation, res.panels)
    return res


def real_ensemble_count_quad(n: int, t: float, stat: str, rtol: float = QUAD_RTOL) -> QuadResult:
    """Expected exceedance count for a real-ensemble extremal statistic."""
    n = _check_n(n, 3)
    ln2 = math.log(2.0)

    def doubled(res: QuadResult) -> QuadResult:
        return QuadResult(res.log_value + ln2, res.log_error + ln2, res.log_truncation + ln2, res.panels)

    if stat == "real_max":
        return real_line_count_quad(n, t, rtol)
    if stat == "complex_max_modulus":
        return doubled(upper_half_count_quad(n, t, "radius", rtol))
    if stat == "radius":
        return logsum_results([doubled(real_line_count_quad(n, t, rtol)), doubled(upper_half_count_quad(n, t, "radius", rtol))])
    if stat == "rightmost":
        return logsum_results([real_line_count_quad(n, t, rtol), doubled(upper_half_count_quad(n, t, "rightmost", rtol))])
    raise InvalidArgumentError(f"unknown statistic {stat!r}")
