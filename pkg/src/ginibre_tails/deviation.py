"""Closed-form deviation laws for extremal Ginibre eigenvalues.

Large deviations (rate function), the centering sequences of the Gumbel
regime, the limiting Gumbel and real-eigenvalue tails, and explicit
moderate-deviation upper envelopes.  Nothing here is random or iterative.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

from .errors import InvalidArgumentError, RegimeError, RegimeWarning
from .specfun import log1pmx

DEFAULT_D_MAX = 0.2


class Beta(enum.IntEnum):
    """Symmetry class: real (1) or complex (2) Ginibre."""

    REAL = 1
    COMPLEX = 2


def as_beta(value) -> Beta:
    if isinstance(value, str):
        key = value.strip().lower()
        if key in ("real", "1"):
            return Beta.REAL
        if key in ("complex", "2"):
            return Beta.COMPLEX
        raise InvalidArgumentError(f"unknown ensemble {value!r}")
    try:
        return Beta(int(value))
    except (ValueError, TypeError):
        raise InvalidArgumentError(f"beta must be 1 or 2, got {value!r}") from None


@dataclass(frozen=True)
class RateEvaluation:
    t: float
    beta: Beta
    rate: float
    finite: bool


@dataclass(frozen=True)
class CenteringSequence:
    n: int
    gamma: float
    kind: str


def rate_shape(t: float) -> float:
    """``t**2 - 2 log t - 1`` for ``t > 0``, accurate near ``t = 1``."""
    u = t * t - 1.0
    return -float(log1pmx(u))


def rate_I(beta, t: float) -> RateEvaluation:
    """Large-deviation rate ``(beta/2)(t^2 - 2 log t - 1)``, infinite below 1.

    >>> round(rate_I(2, 1.3).rate, 7)
    0.1652708
    """
    beta = as_beta(beta)
    if not math.isfinite(t):
        raise InvalidArgumentError("t must be finite")
    if t <= 0:
        raise InvalidArgumentError("rate function needs t > 0")
    if t < 1:
        return RateEvaluation(t, beta, math.inf, False)
    return RateEvaluation(t, beta, 0.5 * int(beta) * rate_shape(t), True)


def centering(kind: str, n: int) -> CenteringSequence:
    """Centering ``gamma_n`` (``kind="radius"``) or ``gamma'_n`` (``"rightmost"``)."""
    if int(n) != n or n < 3:
        raise InvalidArgumentError("centering needs an integer n >= 3")
    n = int(n)
    ln = math.log(n)
    lln = math.log(ln)
    if kind == "radius":
        gamma = ln - 2.0 * lln - math.log(2.0 * math.pi)
    elif kind == "rightmost":
        gamma = (ln - 5.0 * lln - math.log(2.0 * math.pi**4)) / 2.0
    else:
        raise InvalidArgumentError(f"kind must be 'radius' or 'rightmost', got {kind!r}")
    if gamma <= 0:
        raise RegimeError(f"centering undefined at this n: {kind} gamma({n}) = {gamma:.6g} <= 0")
    return CenteringSequence(n, gamma, kind)


def gumbel_cdf_limit(beta, t: float) -> float:
    """Limit law ``exp(-(beta/2) exp(-t))`` of the rescaled extremal statistic."""
    beta = as_beta(beta)
    if math.isnan(t):
        raise InvalidArgumentError("t must not be NaN")
    if t == math.inf:
        return 1.0
    if t == -math.inf:
        return 0.0
    # exp(-t) overflows for t < -709; the CDF is 0 there anyway
    if t < -700:
        return 0.0
    return math.exp(-0.5 * int(beta) * math.exp(-t))


def real_tail_limit(t: float) -> float:
    """Limiting right tail ``exp(-t^2) / (4 sqrt(pi) t)`` of the largest real eigenvalue."""
    if not t > 0:
        raise InvalidArgumentError("real_tail_limit is an asymptotic for t > 0 only")
    if t == math.inf:
        return 0.0
    return math.exp(-t * t) / (4.0 * math.sqrt(math.pi) * t)


def mdp_exponent(d: float) -> float:
    """``d^2 + 2d - 2 log(1 + d)``, the exponent paid per unit ``n`` at radius ``1 + d``."""
    u = d * (2.0 + d)
    return -float(log1pmx(u))


@dataclass(frozen=True)
class MdpEnvelope:
    """Upper bound on ``log P(statistic >= 1 + d)`` with its component terms.

    ``terms`` maps ``"complex"``/``"real"`` to the log of each contribution
    including its constant.  ``log_bound`` combines the terms that enter the
    stated bound; for ``real_max`` only the real-eigenvalue term does.
    """

    beta: Beta
    stat: str
    n: int
    d: float
    log_bound: float
    terms: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    regime_ok: bool = True
    warning: str | None = None
    kind: str = "upper_bound"


def _window(stat: str, n: int, d: float, d_max: float):
    if stat == "real_max":
        lower = n ** -0.5
        label = "n^(-1/2)"
    else:
        kind = "radius" if stat == "radius" else "rightmost"
        try:
            gamma = centering(kind, n).gamma
        except RegimeError as exc:
            return False, f"lower window edge undefined: {exc}"
        lower = math.sqrt(gamma / (4.0 * n))
        label = f"sqrt({'gamma' if kind == 'radius' else 'gamma_prime'}/4n)"
    if d < lower:
        return False, f"d={d:.4g} below window edge {label}={lower:.4g}"
    if d > d_max:
        return False, f"d={d:.4g} above the small-d cutoff {d_max}"
    return True, None


def mdp_envelope(
    beta,
    stat: str,
    n: int,
    d: float,
    c_complex: float = 1.0,
    c_real: float = 1.0,
    d_max: float = DEFAULT_D_MAX,
) -> MdpEnvelope:
    """Moderate-deviation upper envelope for ``P(stat >= 1 + d)``.

    The complex-eigenvalue term decays like ``exp(-n E(d))`` and the
    real-eigenvalue term like ``exp(-n E(d) / 2)`` with
    ``E(d) = d^2 + 2d - 2 log(1 + d)``.  Prefactors:

    ============  ======================  =====================
    stat          complex term            real term (beta = 1)
    ============  ======================  =====================
    radius        ``1 / (sqrt(n) d^2)``   ``1 / (sqrt(n) d)``
    rightmost     ``1 / (n d^(5/2))``     ``1 / (sqrt(n) d)``
    real_max      ``1 / (n d^2)``         ``1 / (sqrt(n) d)``
    ============  ======================  =====================

    The unknown constants enter as ``c_complex`` and ``c_real``.
    """
    beta = as_beta(beta)
    if stat not in ("radius", "rightmost", "real_max"):
        raise InvalidArgumentError(f"unknown statistic {stat!r}")
    if stat == "real_max" and beta != Beta.REAL:
        raise InvalidArgumentError("real_max is defined for the real ensemble only")
    if int(n) != n or n < 1:
        raise InvalidArgumentError("n must be a positive integer")
    if not 0 < d < 1:
        raise InvalidArgumentError("d must lie in (0, 1)")
    if c_complex <= 0 or c_real <= 0:
        raise InvalidArgumentError("constants must be positive")
    n = int(n)
    e = mdp_exponent(d)
    ln, ld = math.log(n), math.log(d)
    real_term = math.log(c_real) - 0.5 * ln - ld - 0.5 * n * e
    if stat == "radius":
        complex_term = math.log(c_complex) - 0.5 * ln - 2.0 * ld - n * e
    elif stat == "rightmost":
        complex_term = math.log(c_complex) - ln - 2.5 * ld - n * e
    else:
        complex_term = math.log(c_complex) - ln - 2.0 * ld - n * e

    terms = {"complex": complex_term}
    if beta == Beta.REAL:
        terms["real"] = real_term
    if stat == "real_max":
        log_bound = real_term
    elif beta == Beta.REAL:
        hi, lo = max(complex_term, real_term), min(complex_term, real_term)
        log_bound = hi + math.log1p(math.exp(lo - hi))
    else:
        log_bound = complex_term

    ok, msg = _window(stat, n, d, d_max)
    if not ok:
        warnings.warn(msg, RegimeWarning, stacklevel=2)
    return MdpEnvelope(
        beta=beta,
        stat=stat,
        n=n,
        d=d,
        log_bound=log_bound,
        terms=terms,
        constants={"complex": c_complex, "real": c_real},
        regime_ok=ok,
        warning=msg,
    )
