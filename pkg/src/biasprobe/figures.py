"""Figure rendering for the report path.

All plots go straight to files through the Agg backend; nothing here
opens a window.  Two figure families are produced: the 4x5 bias-score
heatmap per (learner, rate), and the bias-score-vs-rate curves per
learner.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .features import LINGUISTIC_FEATURES, SURFACE_FEATURES

FIGURE_FORMATS = ("svg", "png")


def heatmap_figure(table, learner_id, rate):
    """4x5 matrix of bias scores; excluded cells are greyed and crossed."""
    n_rows = len(LINGUISTIC_FEATURES)
    n_cols = len(SURFACE_FEATURES)
    values = np.full((n_rows, n_cols), np.nan)
    excluded = np.zeros((n_rows, n_cols), dtype=bool)
    for i, linguistic in enumerate(LINGUISTIC_FEATURES):
        for j, surface in enumerate(SURFACE_FEATURES):
            cell = table.cells.get((learner_id, rate, linguistic, surface))
            if cell is None or cell.lbs is None:
                continue
            values[i, j] = cell.lbs
            excluded[i, j] = cell.excluded

    fig, ax = plt.subplots(figsize=(8.0, 4.8))
    shown = np.ma.masked_invalid(values)
    mesh = ax.imshow(shown, cmap="RdBu", vmin=-1.0, vmax=1.0, aspect="auto")
    ax.set_xticks(range(n_cols))
    ax.set_xticklabels(SURFACE_FEATURES, rotation=30, ha="right", fontsize=8)
    ax.set_yticks(range(n_rows))
    ax.set_yticklabels(LINGUISTIC_FEATURES, fontsize=8)
    ax.set_title(f"bias score  learner={learner_id}  rate={rate:g}", fontsize=10)
    for i in range(n_rows):
        for j in range(n_cols):
            if np.isnan(values[i, j]):
                ax.text(j, i, "n/a", ha="center", va="center", fontsize=8,
                        color="gray")
                continue
            label = f"{values[i, j]:+.2f}"
            if excluded[i, j]:
                ax.add_patch(plt.Rectangle((j - 0.5, i - 0.5), 1, 1,
                                           fill=True, color="lightgray",
                                           alpha=0.75, zorder=2))
                label += "\n(excl)"
            ax.text(j, i, label, ha="center", va="center", fontsize=8, zorder=3)
    fig.colorbar(mesh, ax=ax, shrink=0.85, label="bias score")
    fig.tight_layout()
    return fig


def rate_curves_figure(table, learner_id):
    """Bias score against inoculation rate; one line per task, mean in bold."""
    rates = table.rates
    per_task = {}
    for (lid, rate, linguistic, surface), cell in table.cells.items():
        if lid != learner_id or cell.lbs is None:
            continue
        per_task.setdefault(cell.task_id, {})[rate] = cell
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    means = {}
    for task_id, by_rate in sorted(per_task.items()):
        xs = [r for r in rates if r in by_rate]
        ys = [by_rate[r].lbs for r in xs]
        ax.plot(xs, ys, color="steelblue", alpha=0.35, linewidth=1.0)
        for r, y in zip(xs, ys):
            if by_rate[r].excluded:
                ax.plot([r], [y], marker="x", color="gray", markersize=5)
        for r, y in zip(xs, ys):
            means.setdefault(r, []).append(y)
    if means:
        xs = sorted(means)
        ys = [sum(means[r]) / len(means[r]) for r in xs]
        ax.plot(xs, ys, color="crimson", linewidth=2.2, marker="o",
                label="mean over tasks")
        ax.legend(fontsize=8)
    ax.set_xlabel("inoculation rate")
    ax.set_ylabel("bias score")
    ax.set_ylim(-1.05, 1.05)
    ax.axhline(0.0, color="black", linewidth=0.6, alpha=0.4)
    ax.set_title(f"bias score vs inoculation rate  learner={learner_id}",
                 fontsize=10)
    fig.tight_layout()
    return fig


def render_figures(table, out_dir, formats=FIGURE_FORMATS):
    """Write all figures for every learner/rate in the table; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    seen_pairs = sorted({(lid, rate) for (lid, rate, _, _) in table.cells})
    for learner_id, rate in seen_pairs:
        fig = heatmap_figure(table, learner_id, rate)
        for fmt in formats:
            path = os.path.join(out_dir, f"lbs_heatmap_{learner_id}@{rate:g}.{fmt}")
            fig.savefig(path)
            written.append(path)
        plt.close(fig)
    for learner_id in sorted({lid for (lid, _, _, _) in table.cells}):
        fig = rate_curves_figure(table, learner_id)
        for fmt in formats:
            path = os.path.join(out_dir, f"lbs_by_rate_{learner_id}.{fmt}")
            fig.savefig(path)
            written.append(path)
        plt.close(fig)
    return written
