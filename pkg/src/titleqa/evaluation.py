"""Correctness marking, recall/MRR metrics, and the run report.

A candidate is correct when its answer and the gold answer contain the
same unordered set of terms after analysis. Recall at rank 1 and within
the top 3 are fractions of all questions; mean reciprocal rank averages
1/rank of the first correct answer over only the questions that have at
least one correct candidate (questions without one are excluded, so MRR
is undefined rather than zero when no question qualifies).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import token_set_match
from .config import RunConfig
from .pipeline import (
    CandidateAnswer,
    DegenerateQueryError,
    Question,
    answer_question,
)
from .ranker import FeatureMatrix
from .scoring import feature_layout
from .search import InvertedIndex, WebMockFixture


@dataclass
class QuestionOutcome:
    question: str
    gold_answer: str | None
    n_candidates: int
    first_correct_rank: int | None
    top_answer: str | None


@dataclass
class EvalReport:
    total_questions: int
    questions_with_correct: int
    total_candidates: int
    rank1_count: int
    top3_count: int
    full_count: int
    recall_rank1: float
    recall_top3: float
    recall_full: float
    mrr: float | None
    runtime_seconds: float = 0.0
    config: dict = field(default_factory=dict)
    per_question: list[QuestionOutcome] = field(default_factory=list)

    def render_text(self) -> str:
        def pct(count: int) -> str:
            if self.total_questions == 0:
                return f"{count} (0.00%)"
            return f"{count} ({100.0 * count / self.total_questions:.2f}%)"

        rows = [
            ("Recall of Rank 1", pct(self.rank1_count)),
            ("Recall in Top 3", pct(self.top3_count)),
            ("Recall in Full Candidate Answer Set", pct(self.full_count)),
            ("MRR", "n/a" if self.mrr is None else f"{self.mrr:.4f}"),
            ("Total Questions", str(self.total_questions)),
            ("Total Candidate Answers", str(self.total_candidates)),
            ("Total Runtime (s)", f"{self.runtime_seconds:.4f}"),
        ]
        width = max(len(label) for label, _ in rows) + 2
        return "\n".join(f"{label:<{width}}{value}" for label, value in rows)

    def to_dict(self) -> dict:
        return {
            "total_questions": self.total_questions,
            "questions_with_correct": self.questions_with_correct,
            "total_candidates": self.total_candidates,
            "rank1_count": self.rank1_count,
            "top3_count": self.top3_count,
            "full_count": self.full_count,
            "recall_rank1": self.recall_rank1,
            "recall_top3": self.recall_top3,
            "recall_full": self.recall_full,
            "mrr": self.mrr,
            "runtime_seconds": self.runtime_seconds,
            "config": self.config,
            "per_question": [
                {
                    "question": o.question,
                    "gold_answer": o.gold_answer,
                    "n_candidates": o.n_candidates,
                    "first_correct_rank": o.first_correct_rank,
                    "top_answer": o.top_answer,
                }
                for o in self.per_question
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1),
                              encoding="utf-8")


def mark_correct(candidates: list[CandidateAnswer], gold: str) -> list[bool]:
    """Flag each candidate by token-set equality with the gold answer."""
    if not gold:
        raise ValueError("gold answer must be non-empty")
    return [token_set_match(cand.answer_text, gold) for cand in candidates]


def compute_metrics(flag_lists: list[list[bool]]) -> EvalReport:
    """Metrics over per-question correctness flags in rank order.

    Recall denominators count every question; the MRR denominator counts
    only questions with at least one correct candidate.
    """
    total = len(flag_lists)
    rank1 = top3 = full = 0
    reciprocal_ranks: list[float] = []
    for flags in flag_lists:
        first = next((i + 1 for i, flag in enumerate(flags) if flag), None)
        if first is None:
            continue
        full += 1
        reciprocal_ranks.append(1.0 / first)
        if first == 1:
            rank1 += 1
        if first <= 3:
            top3 += 1
    mrr = sum(reciprocal_ranks) / len(reciprocal_ranks) if reciprocal_ranks else None
    return EvalReport(
        total_questions=total,
        questions_with_correct=full,
        total_candidates=sum(len(flags) for flags in flag_lists),
        rank1_count=rank1,
        top3_count=top3,
        full_count=full,
        recall_rank1=rank1 / total if total else 0.0,
        recall_top3=top3 / total if total else 0.0,
        recall_full=full / total if total else 0.0,
        mrr=mrr,
    )


def _answer_safely(question: Question, index: InvertedIndex, model, cfg: RunConfig,
                   webmock: WebMockFixture | None) -> list[CandidateAnswer]:
    try:
        return answer_question(question, index, model, cfg, webmock)
    except DegenerateQueryError:
        return []


def run_eval(questions: list[Question], index: InvertedIndex, model, cfg: RunConfig,
             webmock: WebMockFixture | None = None) -> EvalReport:
    """Answer every question, mark correctness, and fill the report.

    With ``cfg.workers > 1`` questions are answered on a thread pool; the
    index and model are shared read-only and results are re-ordered by
    question position, so the report does not depend on scheduling.
    """
    start = time.perf_counter()
    if cfg.workers > 1 and len(questions) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            ranked_lists = list(
                pool.map(lambda q: _answer_safely(q, index, model, cfg, webmock), questions)
            )
    else:
        ranked_lists = [_answer_safely(q, index, model, cfg, webmock) for q in questions]

    flag_lists = []
    outcomes = []
    for question, ranked in zip(questions, ranked_lists):
        flags = mark_correct(ranked, question.gold_answer) if question.gold_answer else [
            False for _ in ranked
        ]
        flag_lists.append(flags)
        first = next((i + 1 for i, flag in enumerate(flags) if flag), None)
        outcomes.append(
            QuestionOutcome(
                question=question.text,
                gold_answer=question.gold_answer,
                n_candidates=len(ranked),
                first_correct_rank=first,
                top_answer=ranked[0].answer_text if ranked else None,
            )
        )

    report = compute_metrics(flag_lists)
    report.runtime_seconds = time.perf_counter() - start
    report.config = dict(cfg.resolved())
    # Fill-in-the-blank answers keep any known text between blanks; flagged
    # here because automatic marking treats that text as part of the answer.
    report.config["fitb_keeps_interior_text"] = True
    report.per_question = outcomes
    return report


def collect_features(questions: list[Question], index: InvertedIndex, cfg: RunConfig,
                     webmock: WebMockFixture | None = None
                     ) -> tuple[FeatureMatrix, list[dict]]:
    """Feature rows and 0/1 labels for every candidate of every question
    that carries a gold answer; labels use the same token-set rule as
    evaluation. Also returns row metadata for feature dumps."""
    layout = feature_layout(tuple(cfg.engines))
    rows: list[tuple[float, ...]] = []
    labels: list[int] = []
    meta: list[dict] = []
    for q_index, question in enumerate(questions):
        if not question.gold_answer:
            continue
        ranked = _answer_safely(question, index, None, cfg, webmock)
        flags = mark_correct(ranked, question.gold_answer)
        for cand, flag in zip(ranked, flags):
            rows.append(cand.score_vector.values)
            labels.append(1 if flag else 0)
            meta.append(
                {"question_index": q_index, "answer": cand.answer_text, "label": int(flag)}
            )
    matrix = FeatureMatrix(
        rows=np.array(rows, dtype=np.float64).reshape(len(rows), len(layout)),
        labels=np.array(labels, dtype=np.float64),
        layout=layout,
    )
    return matrix, meta


def dump_features(matrix: FeatureMatrix, meta: list[dict], path: str | Path) -> None:
    """Write the per-candidate feature matrix as TSV with a header row."""
    header = ["question_index", "answer", "label", *matrix.layout]
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(header) + "\n")
        for row, info in zip(matrix.rows, meta):
            cells = [str(info["question_index"]), info["answer"], str(info["label"])]
            cells.extend(repr(float(v)) for v in row)
            handle.write("\t".join(cells) + "\n")
