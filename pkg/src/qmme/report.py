"""Figure rendering for experiment reports.

The experiment command writes these PNGs next to its JSON/CSV output: a
per-metric box plot of the split distributions for each method, and the
precision-recall curves of the first split.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import METRIC_NAMES, ExperimentReport


def precision_recall_points(scores, labels) -> tuple:
    """Recall/precision pairs along the descending score ranking, ties as blocks."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    total_pos = int(y.sum())
    boundaries = np.flatnonzero(np.diff(s)) + 1
    recalls = [0.0]
    precisions = [1.0]
    tp = 0
    seen = 0
    for block in np.split(np.arange(s.size), boundaries):
        tp += int(y[block].sum())
        seen += block.size
        recalls.append(tp / total_pos if total_pos else 0.0)
        precisions.append(tp / seen)
    return np.array(recalls), np.array(precisions)


def render_metric_boxplots(report: ExperimentReport, path) -> Path:
    """One subplot per metric, one box per method over the split distribution."""
    methods = report.config["methods"]
    fig, axes = plt.subplots(1, len(METRIC_NAMES), figsize=(3.0 * len(METRIC_NAMES), 3.6))
    for ax, name in zip(np.atleast_1d(axes), METRIC_NAMES):
        data = [
            [getattr(r, name) for r in report.per_split if r.method == m]
            for m in methods
        ]
        ax.boxplot(data, tick_labels=methods)
        ax.set_title(name)
        ax.set_ylim(-0.05, 1.05)
        ax.grid(True, alpha=0.3)
    fig.suptitle(f"metric distributions over {report.config['n_splits']} splits")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_pr_curves(curves: dict, path, split_id: int = 0) -> Path:
    """Precision-recall curves per method for one split, with the prevalence floor."""
    fig, ax = plt.subplots(figsize=(4.8, 4.2))
    prevalence = None
    for method, (scores, labels) in curves.items():
        recalls, precisions = precision_recall_points(scores, labels)
        ax.step(recalls, precisions, where="post", label=method)
        labels = np.asarray(labels)
        prevalence = float(np.mean(labels))
    if prevalence is not None:
        ax.axhline(prevalence, linestyle="--", linewidth=1.0, color="gray",
                   label=f"prevalence {prevalence:.3f}")
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_title(f"precision-recall, split {split_id}")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.05)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_report_figures(report: ExperimentReport, curves: dict, out_dir) -> list:
    """Write all report figures into out_dir and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [render_metric_boxplots(report, out_dir / "metrics_boxplot.png")]
    if curves:
        written.append(render_pr_curves(curves, out_dir / "pr_curve_split0.png"))
    return written
