"""Figures for routing and Monte Carlo reports, rendered off-screen to files."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .noise import LSReport  # noqa: E402

_METADATA = {"Software": None}


def plot_paths(paths: Sequence[Sequence[tuple[int, int, int]]], L: int, out: str, title: str = "") -> None:
    """Draw routed paths; 3D paths are shown in a 3D axes, planar ones in 2D."""
    three_d = any(v[2] != 0 for p in paths for v in p)
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(projection="3d" if three_d else None)
    cmap = plt.get_cmap("tab20")
    for r, path in enumerate(paths):
        pts = np.asarray(path, dtype=float)
        color = cmap(r % 20)
        if three_d:
            ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], color=color, lw=1.5)
            ax.scatter(*pts[[0, -1]].T, color=color, s=12)
        else:
            ax.plot(pts[:, 0], pts[:, 1], color=color, lw=1.5)
            ax.scatter(pts[[0, -1], 0], pts[[0, -1], 1], color=color, s=12)
    if not three_d:
        ax.set_xlim(-0.5, L - 0.5)
        ax.set_ylim(-0.5, L - 0.5)
        ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title or f"{len(paths)} paths, L = {L}")
    fig.savefig(out, dpi=100, metadata=_METADATA)
    plt.close(fig)


def plot_ls_report(report: LSReport, out: str, title: str = "") -> None:
    """Empirical subset probabilities against their bounds, one marker per subset."""
    fig, ax = plt.subplots(figsize=(6, 4))
    sizes = sorted({len(c.subset) for c in report.checks})
    for s in sizes:
        rows = [c for c in report.checks if len(c.subset) == s]
        emp = np.array([c.empirical for c in rows])
        ax.scatter(np.full(len(rows), s) + np.linspace(-0.2, 0.2, len(rows)), emp,
                   s=6, label=f"|F| = {s}", alpha=0.6)
        ax.hlines(rows[0].bound, s - 0.3, s + 0.3, colors="k")
    ax.set_yscale("symlog", linthresh=1e-8)
    ax.set_xticks(sizes)
    ax.set_xlabel("subset size |F|")
    ax.set_ylabel("Pr[F in supp(E)]")
    ax.set_title(title or f"{report.samples} samples")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out, dpi=100, metadata=_METADATA)
    plt.close(fig)
