"""Independent reference values (mpmath, scipy, brute force) for the tests."""

import math

import mpmath as mp
import numpy as np
from scipy import special


def mp_reg_gamma(a, x, dps=50):
    """(P, Q) at high precision; the lower function via 1F1 avoids mpmath's slow upper branch."""
    with mp.workdps(dps):
        a, x = mp.mpf(a), mp.mpf(x)
        if x == 0:
            return mp.mpf(0), mp.mpf(1)
        if x < a:
            p = x**a * mp.exp(-x) / mp.gamma(a + 1) * mp.hyp1f1(1, a + 1, x, maxterms=10**8)
            return p, 1 - p
        q = mp.gammainc(a, x, mp.inf, regularized=True)
        return 1 - q, q


def mp_log_trunc_exp(n, z, dps=60):
    """log sum_{k=0}^n z^k / k! by direct high-precision summation."""
    with mp.workdps(dps):
        z = mp.mpf(z)
        term = mp.mpf(1)
        s = mp.mpf(1)
        for k in range(1, n + 1):
            term *= z / k
            s += term
        return float(mp.log(s))


def eks_real_count(n):
    """Closed form for the expected number of real eigenvalues of an n x n real Ginibre matrix."""
    return 0.5 + math.sqrt(2.0) * math.exp(special.gammaln(n + 0.5) - special.gammaln(n)) / math.sqrt(math.pi) * special.hyp2f1(
        1, -0.5, n, 0.5
    )


def tensor_rightmost_count(n, t, half_width=0.6, depth=0.5, panel=0.01, m=16):
    """int_{Re z >= t} K_n d^2z on a tensor Gauss-Legendre grid, using scipy's gammaincc."""
    xg, wg = np.polynomial.legendre.leggauss(m)

    def nodes(a, b):
        edges = np.arange(a, b + panel / 2, panel)
        lo, hi = edges[:-1], edges[1:]
        h, c = 0.5 * (hi - lo), 0.5 * (hi + lo)
        return (c[:, None] + h[:, None] * xg).ravel(), (h[:, None] * wg).ravel()

    x, wx = nodes(t, t + depth)
    y, wy = nodes(0.0, half_width)
    X, Y = np.meshgrid(x, y, indexing="ij")
    vals = (n / math.pi) * special.gammaincc(n, n * (X * X + Y * Y))
    return 2.0 * float(wx @ vals @ wy)


def chi_tail_oracle(n, ts, draws, seed):
    """Brute-force P(max_k sqrt(G_k/n) >= t) from gamma draws, for several t at once."""
    rng = np.random.default_rng(seed)
    radii = np.empty(draws)
    chunk = max(1, 2_000_000 // n)
    shapes = np.arange(1.0, n + 1.0)
    for lo in range(0, draws, chunk):
        hi = min(draws, lo + chunk)
        radii[lo:hi] = np.sqrt(rng.standard_gamma(shapes, size=(hi - lo, n)).max(axis=1) / n)
    return {t: int(np.count_nonzero(radii >= t)) for t in ts}
