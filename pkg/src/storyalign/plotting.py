"""Figures written next to the CSV/JSON outputs.

Everything renders through the Agg backend with fixed sizes, dpi and no
timestamp metadata, so the same inputs give byte-identical PNG files.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "storyalign",
}
DPI = 120


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, dpi=DPI, metadata={"Software": None})
    plt.close(fig)


def plot_similarity(matrix, path, alignment=None, ground_truth: Mapping[str, int] | None = None, title: str = "") -> None:
    """Heatmap of the score matrix; chosen cells boxed, ground-truth cells dotted."""
    with plt.rc_context(STYLE):
        n, t = matrix.shape
        fig, ax = plt.subplots(figsize=(max(4.2, 0.45 * t + 1.8), max(2.2, 0.4 * n + 1.2)))
        im = ax.imshow(matrix.scores, cmap="viridis", vmin=-1.0, vmax=1.0, aspect="auto")
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04, label="srel")
        ax.set_xticks(range(t))
        ax.set_yticks(range(n))
        ax.set_yticklabels(matrix.image_ids)
        ax.set_xlabel("paragraph   (red box: placed, dot: ground truth)")
        rows = {img: r for r, img in enumerate(matrix.image_ids)}
        if ground_truth:
            pts = [(c, rows[i]) for i, c in ground_truth.items() if i in rows]
            if pts:
                xs, ys = zip(*pts)
                ax.scatter(xs, ys, marker="o", s=18, c="white", edgecolors="black", linewidths=0.6)
        if alignment is not None:
            for img, c in alignment.assignments.items():
                if img in rows:
                    ax.add_patch(plt.Rectangle((c - 0.5, rows[img] - 0.5), 1, 1, fill=False, ec="red", lw=1.6))
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, path)


def plot_metrics(rows: Sequence[tuple[str, Mapping[str, float]]], path, title: str = "") -> None:
    """Grouped bars, one group per measure, one bar per method (values x100)."""
    names = []
    for _, metrics in rows:
        names.extend(k for k in metrics if k not in names)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(names) + 1.5), 3.0))
        width = 0.8 / max(1, len(rows))
        x = np.arange(len(names))
        for k, (label, metrics) in enumerate(rows):
            vals = [100 * metrics.get(n, np.nan) for n in names]
            ax.bar(x + (k - (len(rows) - 1) / 2) * width, vals, width, label=label)
        ax.set_xticks(x)
        ax.set_xticklabels(names, rotation=20)
        ax.set_ylim(0, 105)
        ax.set_ylabel("score x100")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path)


def plot_baselines(results: Mapping[str, Mapping[str, Sequence[float]]], path, metric: str = "ParaRank") -> None:
    """Per-story distribution of one measure for each method."""
    methods = list(results)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        data = [np.asarray(results[m][metric]) * 100 for m in methods]
        ax.boxplot(data, showmeans=True)
        ax.set_xticks(range(1, len(methods) + 1))
        ax.set_xticklabels(methods)
        ax.set_ylabel(f"{metric} x100")
        ax.axhline(50, color="grey", lw=0.8, ls="--")
        fig.tight_layout()
        _save(fig, path)
