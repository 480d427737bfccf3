"""Figure rendering for the CLI report paths.

Every command that writes delimited output also drops a small set of
matplotlib figures next to it, so a run can be eyeballed without
post-processing. Rendering failures are logged and swallowed: figures
are a convenience, never a reason to fail a run.
"""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

logger = logging.getLogger(__name__)

__all__ = ["plot_bench_scores", "plot_cluster_scatter", "plot_reward_traces", "plot_task_alcs"]


def _save(fig, out_path: Path) -> None:
    try:
        fig.tight_layout()
        fig.savefig(out_path, dpi=120)
    finally:
        plt.close(fig)


def plot_cluster_scatter(descriptors, labels, out_path) -> None:
    """Candidate pairs in (gram Jaccard, raw ALCS) space, colored by
    cluster id."""
    out_path = Path(out_path)
    try:
        xs = [d.s_j for d in descriptors]
        ys = [d.s_a for d in descriptors]
        cs = [labels[d.key] for d in descriptors]
        fig, ax = plt.subplots(figsize=(6, 4.5))
        scatter = ax.scatter(xs, ys, c=cs, cmap="tab10", s=42, edgecolor="k", linewidth=0.4)
        ax.set_xlabel("q-gram Jaccard pre-score")
        ax.set_ylabel("raw ALCS pre-score")
        ax.set_title("Candidate pairs by cluster")
        if len(set(cs)) > 1:
            fig.colorbar(scatter, ax=ax, label="cluster")
        _save(fig, out_path)
    except Exception:  # pragma: no cover - plotting is best effort
        logger.exception("failed to render %s", out_path)


def plot_reward_traces(traces: dict[str, list[float]], out_path) -> None:
    """Cumulative best reward per training episode, one line per task."""
    out_path = Path(out_path)
    try:
        fig, ax = plt.subplots(figsize=(6, 4.5))
        for name, values in sorted(traces.items()):
            if values:
                ax.plot(range(1, len(values) + 1), values, marker="o", markersize=3, label=name)
        ax.set_xlabel("episode")
        ax.set_ylabel("episode reward")
        ax.set_title("Training reward traces")
        if traces and len(traces) <= 12:
            ax.legend(fontsize=7)
        _save(fig, out_path)
    except Exception:  # pragma: no cover
        logger.exception("failed to render %s", out_path)


def plot_task_alcs(task_scores: dict[str, float], out_path) -> None:
    """Final mean alignment per join task."""
    out_path = Path(out_path)
    try:
        names = sorted(task_scores)
        values = [task_scores[n] for n in names]
        fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(names)), 4))
        ax.bar(range(len(names)), values, color="#4878cf")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=7)
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("final mean ALCS")
        ax.set_title("Alignment after learned transformations")
        _save(fig, out_path)
    except Exception:  # pragma: no cover
        logger.exception("failed to render %s", out_path)


def plot_bench_scores(rows: list[dict], out_path) -> None:
    """Grouped precision/recall/F1 bars per benchmark case."""
    out_path = Path(out_path)
    try:
        names = [r["case"] for r in rows]
        metrics = ("precision", "recall", "f1")
        x = np.arange(len(names))
        width = 0.27
        fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(names)), 4.5))
        for i, metric in enumerate(metrics):
            ax.bar(x + (i - 1) * width, [r[metric] for r in rows], width, label=metric)
        ax.set_xticks(x)
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
        ax.set_ylim(0, 1.05)
        ax.set_title("Benchmark scores")
        ax.legend()
        _save(fig, out_path)
    except Exception:  # pragma: no cover
        logger.exception("failed to render %s", out_path)
