"""Ginibre matrices, their spectra, and the Kostlan radius sampler.

Every trial draws from its own Philox stream whose 128-bit key is derived
from ``(master_seed, trial_index)``::

    k0 = splitmix64(splitmix64(master_seed) + trial_index * 0x9E3779B97F4A7C15)
    k1 = splitmix64(k0 ^ 0xD1B54A32D192ED03)
    key = k0 | (k1 << 64)

with all arithmetic modulo 2**64 and ``splitmix64`` the finalizer of
Steele, Lea and Flood.  The stream of a trial therefore does not depend on
which worker runs it or in which order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .deviation import Beta, as_beta
from .errors import InvalidArgumentError, NumericalError

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix64(master_seed: int, trial_index: int) -> int:
    """128-bit Philox key for one trial (see module docstring)."""
    k0 = splitmix64((splitmix64(master_seed & MASK64) + trial_index * GOLDEN) & MASK64)
    k1 = splitmix64(k0 ^ 0xD1B54A32D192ED03)
    return k0 | (k1 << 64)


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if int(self.trial_index) != self.trial_index or self.trial_index < 0:
            raise InvalidArgumentError("trial_index must be a nonnegative integer")
        if not -(1 << 63) <= int(self.master_seed) <= MASK64:
            raise InvalidArgumentError("master_seed must fit in 64 bits")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=mix64(int(self.master_seed), int(self.trial_index))))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SeedSpec):
        return seed.rng()
    if isinstance(seed, (int, np.integer)):
        return SeedSpec(int(seed), 0).rng()
    raise InvalidArgumentError(f"cannot build a generator from {type(seed).__name__}")


def _check_n(n):
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n!r}")
    return int(n)


def sample_ginibre(beta, n: int, seed) -> np.ndarray:
    """``n x n`` Ginibre matrix with ``E|x_ij|^2 = 1/n``.

    Complex entries have independent real and imaginary parts of variance
    ``1/(2n)``.
    """
    beta = as_beta(beta)
    n = _check_n(n)
    rng = _as_rng(seed)
    if beta == Beta.REAL:
        return rng.standard_normal((n, n)) / math.sqrt(n)
    z = rng.standard_normal((n, n, 2)) / math.sqrt(2.0 * n)
    return z[..., 0] + 1j * z[..., 1]


@dataclass
class Spectrum:
    """Eigenvalues of one matrix.

    For the real ensemble ``real_eigs`` and ``complex_pairs`` (``Im > 0``, one
    entry per conjugate pair) partition the spectrum.  For the complex
    ensemble both are empty and ``points`` holds all ``n`` eigenvalues.
    """

    n: int
    ensemble: Beta
    real_eigs: np.ndarray = field(default_factory=lambda: np.empty(0))
    complex_pairs: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))
    points: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))

    def all_eigenvalues(self) -> np.ndarray:
        if self.ensemble == Beta.COMPLEX:
            return self.points
        pairs = self.complex_pairs
        return np.concatenate((self.real_eigs.astype(complex), pairs, pairs.conj()))


def _schur_partition(a: np.ndarray):
    """Read real eigenvalues and pairs off the block structure of a real Schur form."""
    t = scipy.linalg.schur(a, output="real")[0]
    n = t.shape[0]
    reals, pairs = [], []
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            blk = t[i : i + 2, i : i + 2]
            ev = np.linalg.eigvals(blk)
            pairs.append(complex(ev[0].real, abs(ev[0].imag)))
            i += 2
        else:
            reals.append(t[i, i])
            i += 1
    return np.asarray(reals), np.asarray(pairs, dtype=complex)


def _tolerance_partition(w: np.ndarray):
    tol = 1e-8 * (1.0 + np.abs(w))
    is_real = np.abs(w.imag) <= tol
    return w.real[is_real].copy(), w[~is_real & (w.imag > 0)]


def eigenvalues(matrix, ensemble, seed=None) -> Spectrum:
    """Spectrum of a Ginibre draw.

    For real input LAPACK ``geev`` returns real eigenvalues with an imaginary
    part of exactly zero (1x1 blocks of its real Schur form) and exact
    conjugate pairs otherwise; that partition is used directly.  If it is
    inconsistent the explicit Schur form is parsed instead.  Failed solves are
    retried once on a balanced matrix.
    """
    beta = as_beta(ensemble)
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("matrix has non-finite entries")
    n = a.shape[0]
    if beta == Beta.REAL and np.iscomplexobj(a):
        raise InvalidArgumentError("real ensemble needs a real matrix")

    try:
        w = np.linalg.eigvals(a)
    except np.linalg.LinAlgError:
        try:
            b, _ = scipy.linalg.matrix_balance(a, permute=False)
            w = np.linalg.eigvals(b)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver did not converge (seed={seed!r})") from exc

    if beta == Beta.COMPLEX:
        return Spectrum(n, beta, points=np.asarray(w, dtype=complex))

    w = np.asarray(w, dtype=complex)
    im = w.imag
    reals = w.real[im == 0.0]
    pairs = w[im > 0.0]
    if len(reals) + 2 * len(pairs) != n or np.count_nonzero(im < 0.0) != len(pairs):
        try:
            reals, pairs = _schur_partition(a)
        except (np.linalg.LinAlgError, ValueError):
            reals, pairs = _tolerance_partition(w)
    return Spectrum(n, beta, real_eigs=np.asarray(reals, dtype=float), complex_pairs=np.asarray(pairs, dtype=complex))


def kostlan_sample_radius(n: int, seed) -> float:
    """Spectral radius of a complex Ginibre matrix, drawn in O(n).

    ``max_k sqrt(G_k / n)`` with ``G_k ~ Gamma(k, 1)`` independent; numpy's
    gamma sampler is the Marsaglia-Tsang squeeze method for these shapes.
    """
    n = _check_n(n)
    g = _as_rng(seed).standard_gamma(np.arange(1.0, n + 1.0))
    return math.sqrt(float(g.max()) / n)


def kostlan_sample_moduli(n: int, seed) -> np.ndarray:
    """All ``n`` eigenvalue moduli (unordered law) of a complex Ginibre matrix."""
    n = _check_n(n)
    return np.sqrt(_as_rng(seed).standard_gamma(np.arange(1.0, n + 1.0)) / n)


@dataclass(frozen=True)
class ExtremalStats:
    radius: float
    rightmost: float
    real_max: float | None = None
    complex_max_modulus: float | None = None
    real_count: int | None = None

    def get(self, stat: str) -> float | None:
        return getattr(self, stat)


def extremal_stats(s: Spectrum) -> ExtremalStats:
    if s.ensemble == Beta.COMPLEX:
        pts = s.points
        return ExtremalStats(float(np.abs(pts).max()), float(pts.real.max()))
    re, pairs = s.real_eigs, s.complex_pairs
    radius = max(np.abs(re).max(initial=0.0), np.abs(pairs).max(initial=0.0))
    rightmost = max(re.max(initial=-math.inf), pairs.real.max(initial=-math.inf))
    return ExtremalStats(
        float(radius),
        float(rightmost),
        float(re.max()) if re.size else None,
        float(np.abs(pairs).max()) if pairs.size else None,
        int(re.size),
    )
