"""Figure rendering for evaluation reports.

Figures are written straight to files (Agg backend, no display) next to
the run's other outputs: a bar chart of the headline metrics and a
histogram of where the first correct answer landed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluation import EvalReport  # noqa: E402


def save_metrics_figure(report: EvalReport, path: str | Path) -> None:
    labels = ["Recall@1", "Recall@3", "Full recall", "MRR"]
    values = [
        report.recall_rank1,
        report.recall_top3,
        report.recall_full,
        report.mrr if report.mrr is not None else 0.0,
    ]
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    bars = ax.bar(labels, values, color=["#4878d0", "#4878d0", "#4878d0", "#ee854a"])
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("fraction")
    ax.set_title(f"Answer ranking over {report.total_questions} questions")
    for bar, value in zip(bars, values):
        ax.annotate(f"{value:.3f}", (bar.get_x() + bar.get_width() / 2, value),
                    ha="center", va="bottom", fontsize=9)
    if report.mrr is None:
        ax.text(3, 0.05, "n/a", ha="center", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_rank_histogram(report: EvalReport, path: str | Path) -> None:
    ranks = [o.first_correct_rank for o in report.per_question
             if o.first_correct_rank is not None]
    misses = len(report.per_question) - len(ranks)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    if ranks:
        top = max(ranks)
        ax.hist(ranks, bins=range(1, top + 2), align="left", rwidth=0.85,
                color="#4878d0")
        ax.set_xticks(range(1, top + 1))
    ax.set_xlabel("rank of first correct answer")
    ax.set_ylabel("questions")
    ax.set_title(f"First correct answer rank ({misses} questions unanswered)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_figures(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Render all report figures into a directory; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "metrics.png", out / "first_correct_rank.png"]
    save_metrics_figure(report, paths[0])
    save_rank_histogram(report, paths[1])
    return paths
