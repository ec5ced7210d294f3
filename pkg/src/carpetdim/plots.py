"""Matplotlib figures for the CLI reports, written straight to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_box_counts(result, path, reference: float | None = None) -> Path:
    """Log-log plot of box counts with the fitted line."""
    inv = 1.0 / np.asarray(result.deltas)
    counts = np.asarray(result.counts, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(inv, counts, "o", label="N(delta)")
    fit = np.exp(result.intercept) * inv**result.slope
    ax.loglog(inv, fit, "-", label=f"slope {result.slope:.4f}")
    if reference is not None:
        ref = counts[0] * (inv / inv[0]) ** reference
        ax.loglog(inv, ref, "--", color="gray", label=f"dim_B {reference:.4f}")
    ax.set_xlabel("1 / delta")
    ax.set_ylabel("mesh cells")
    ax.legend()
    return _save(fig, path)


def plot_ahlfors(probe, path) -> Path:
    """Mean log mass ratio against scale."""
    ks = np.asarray(probe.exponents)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(ks, probe.mean_log_ratio, "o-")
    ax.axhline(np.log(probe.ratio_min), color="gray", ls=":")
    ax.axhline(np.log(probe.ratio_max), color="gray", ls=":")
    ax.set_xlabel("k  (delta = 2^-k)")
    ax.set_ylabel("mean log( mu(Q) / delta^dim )")
    ax.set_title(f"{probe.measure}, slope {probe.slope:+.4f}")
    return _save(fig, path)


def plot_dimensions(report, path) -> Path:
    """Bar chart of the four dimensions and the candidate exponents."""
    p = report.profile
    dims = report.dimensions
    labels = ["dim_L", "dim_H", "dim_B", "dim_A"]
    values = [dims.lower, dims.hausdorff, dims.box, dims.assouad]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
    ax1.bar(labels, values, color="#1f3b73")
    ax1.set_ylim(0, 2)
    ax1.set_title(f"case {report.classification['cor14_case']}")
    cand = ["t1", "t2", "D1", "D2", "E1_tilde", "E2_tilde", "F1_tilde", "F2_tilde"]
    ax2.bar(range(len(cand)), [p[c] for c in cand], color="#7a8fb8")
    ax2.set_xticks(range(len(cand)), [c.replace("_tilde", "~") for c in cand], rotation=45)
    ax2.set_ylim(0, 2)
    return _save(fig, path)

