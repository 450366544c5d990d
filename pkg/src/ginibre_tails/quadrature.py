"""Adaptive Gauss-Legendre quadrature for nonnegative integrands given in log form.

Integrands are passed as ``log f`` so that exponentially small kernels can be
integrated after a common shift.  Each panel is evaluated with a 10- and a
20-point rule; the difference is used as the panel error estimate and the
panel with the largest estimate is bisected until the total meets tolerance.

For ``[a, inf)`` the caller supplies ``log_tail(R)``, a rigorous upper bound
on ``log int_R^inf f``.  The cutoff is pushed out until that bound is below
``tail_rtol`` times the integral, and the bound is reported with the result.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError

LogIntegrand = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=None)
def _gl_rule(m: int):
    return np.polynomial.legendre.leggauss(m)


@dataclass(frozen=True)
class QuadResult:
    log_value: float
    log_error: float
    log_truncation: float = -math.inf
    panels: int = 0

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    @property
    def error(self) -> float:
        return math.exp(self.log_error)

    @property
    def truncation_bound(self) -> float:
        return math.exp(self.log_truncation)

    @property
    def rel_error(self) -> float:
        if self.log_value == -math.inf:
            return 0.0 if self.log_error == -math.inf else math.inf
        return math.exp(self.log_error - self.log_value)


def _panel(logf, a, b, shift, m=10):
    x1, w1 = _gl_rule(m)
    x2, w2 = _gl_rule(2 * m)
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    nodes = np.concatenate((mid + half * x1, mid + half * x2))
    with np.errstate(under="ignore", over="ignore"):
        vals = np.exp(np.asarray(logf(nodes), dtype=float) - shift)
    vals = np.nan_to_num(vals, nan=0.0, posinf=np.inf)
    coarse = half * np.dot(w1, vals[:m])
    fine = half * np.dot(w2, vals[m:])
    return fine, abs(fine - coarse)


def _initial_shift(logf, edges):
    probe = np.concatenate([np.linspace(lo, hi, 9) for lo, hi in zip(edges[:-1], edges[1:])])
    vals = np.asarray(logf(probe), dtype=float)
    vals = vals[np.isfinite(vals)]
    return float(vals.max()) if vals.size else 0.0


def integrate_log(
    logf: LogIntegrand,
    a: float,
    b: float,
    rtol: float = 1e-10,
    breakpoints: Sequence[float] = (),
    initial_panels: int = 8,
    max_panels: int = 20000,
    shift: float | None = None,
) -> QuadResult:
    """Integrate ``exp(logf)`` over ``[a, b]`` to relative tolerance ``rtol``."""
    if not b > a:
        return QuadResult(-math.inf, -math.inf)
    cuts = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    edges = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        edges.extend(np.linspace(lo, hi, initial_panels + 1)[:-1])
    edges.append(b)
    edges = np.asarray(edges)
    if shift is None:
        shift = _initial_shift(logf, edges)

    heap = []
    total = 0.0
    total_err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _panel(logf, lo, hi, shift)
        heapq.heappush(heap, (-err, lo, hi, val))
        total += val
        total_err += err
    while total_err > rtol * abs(total) and total_err > 0:
        if len(heap) >= max_panels:
            raise NumericalError(
                f"quadrature did not reach rtol={rtol}; estimated error {total_err / abs(total) if total else math.inf:.3g}",
                bound=total_err * math.exp(shift),
            )
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            heapq.heappush(heap, (neg_err, lo, hi, val))
            break
        total -= val
        total_err += neg_err
        for plo, phi in ((lo, mid), (mid, hi)):
            v, e = _panel(logf, plo, phi, shift)
            heapq.heappush(heap, (-e, plo, phi, v))
            total += v
            total_err += e
    # recompute the sums from scratch to shed accumulated round-off
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    log_value = math.log(total) + shift if total > 0 else -math.inf
    log_err = math.log(total_err) + shift if total_err > 0 else -math.inf
    return QuadResult(log_value, log_err, -math.inf, len(heap))


def integrate_log_to_inf(
    logf: LogIntegrand,
    a: float,
    log_tail: Callable[[float], float],
    rtol: float = 1e-10,
    tail_rtol: float = 1e-16,
    scale: float = 1.0,
    breakpoints: Sequence[float] = (),
    max_doublings: int = 60,
) -> QuadResult:
    """Integrate ``exp(logf)`` over ``[a, inf)``.

    ``log_tail(R)`` must bound ``log int_R^inf exp(logf)`` from above.
    """
    R = a + scale
    pieces = [integrate_log(logf, a, R, rtol=rtol, breakpoints=breakpoints)]
    for _ in range(max_doublings):
        log_total = float(np.logaddexp.reduce([p.log_value for p in pieces]))
        lt = log_tail(R)
        if lt <= math.log(tail_rtol) + log_total:
            log_err = float(np.logaddexp.reduce([p.log_error for p in pieces] + [lt]))
            return QuadResult(log_total, log_err, lt, sum(p.panels for p in pieces))
        R_new = a + 2.0 * (R - a)
        pieces.append(integrate_log(logf, R, R_new, rtol=rtol, breakpoints=breakpoints))
        R = R_new
    raise NumericalError("could not certify the truncated tail", bound=math.exp(log_tail(R)))


def logsum_results(results: Sequence[QuadResult]) -> QuadResult:
    """Combine independent integrals into the integral of their sum."""
    lv = float(np.logaddexp.reduce([r.log_value for r in results]))
    le = float(np.logaddexp.reduce([r.log_error for r in results]))
    lt = float(np.logaddexp.reduce([r.log_truncation for r in results]))
    return QuadResult(lv, le, lt, sum(r.panels for r in results))
