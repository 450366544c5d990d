"""Figures for the CLI report commands (rendered off-screen)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def ldp_figure(rows, path):
    n = np.array([r.n for r in rows], dtype=float)
    gap = np.array([r.gap for r in rows])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(n, np.abs(gap), "o-", label="|gap|")
    ax.loglog(n, np.log(n) / n, "--", label="log n / n")
    ax.set_xlabel("n")
    ax.set_ylabel("-(1/n) log P - I")
    ax.legend()
    _save(fig, path)


def mdp_figure(rows, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for t in sorted({r.t for r in rows}):
        sel = [r for r in rows if r.t == t]
        ax.semilogx([r.n for r in sel], [r.value for r in sel], "o-", label=f"t={t:g}")
        ax.axhline(sel[0].target, color="grey", lw=0.8, ls=":")
    ax.set_xlabel("n")
    ax.set_ylabel("log P / (n d_n^2)")
    ax.legend()
    _save(fig, path)


def gumbel_figure(check, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(check.grid, check.cdf, label="finite n")
    ax.plot(check.grid, check.limit, "--", label="limit")
    ax.set_xlabel("t")
    ax.set_ylabel("CDF")
    ax.set_title(f"n={check.n}, KS={check.ks_stat:.3f}")
    ax.legend()
    _save(fig, path)


def saturn_figure(result, path):
    rec = result.records
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.scatter(rec[:, 2], rec[:, 1], s=3, alpha=0.5)
    th = result.threshold
    ax.axvline(th, color="grey", lw=0.8)
    ax.axhline(th, color="grey", lw=0.8)
    ax.set_xlabel("largest non-real modulus")
    ax.set_ylabel("largest real eigenvalue")
    _save(fig, path)


def spectrum_figure(re, im, is_real, path):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    re, im, is_real = map(np.asarray, (re, im, is_real))
    ax.scatter(re[~is_real], im[~is_real], s=1, alpha=0.3, label="non-real")
    ax.scatter(re[is_real], im[is_real], s=2, color="C3", label="real")
    circle = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(circle), np.sin(circle), "k", lw=0.6)
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=7)
    _save(fig, path)
