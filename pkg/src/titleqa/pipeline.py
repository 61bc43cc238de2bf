"""Question-to-ranked-answers orchestration.

Questions are classified by regex into one of two categories: general
trivia (factoid) and fill-in-the-blank (a run of two or more
underscores). Both build the same field-weighted query, favoring matches
in document content over matches in titles; fill-in-the-blank questions
drop the blanks before querying and extract their answers from the span
of each retrieved title between the question's literal prefix and
suffix.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .analysis import analyze
from .config import RunConfig
from .ranker import rank_candidates
from .scoring import (
    ScoreVector,
    aggregate_evidence,
    assemble_feature_vector,
    evidence_scores,
    feature_layout,
)
from .search import (
    ENGINE_QLM,
    ENGINE_VSM,
    ENGINE_WEBMOCK,
    FIELD_CONTENT,
    FIELD_PASSAGE,
    FIELD_TITLE,
    STAGE_PASSAGE,
    STAGE_SEARCH,
    InvertedIndex,
    Query,
    QueryClause,
    SearchResult,
    WebMockFixture,
    fuse_results,
    search_qlm,
    search_vsm,
    search_webmock,
)

FACTOID = "factoid"
FITB = "fitb"

_BLANK_RE = re.compile(r"_{2,}")
_WORD_RE = re.compile(r"[a-z0-9]+", re.IGNORECASE)


class DegenerateQueryError(ValueError):
    """The question text analyzes to zero query terms."""


@dataclass
class Question:
    text: str
    category: str
    gold_answer: str | None = None

    @classmethod
    def make(cls, text: str, category: str | None = None,
             gold_answer: str | None = None) -> "Question":
        if not text.strip():
            raise ValueError("question text must be non-empty")
        if category is None:
            category = classify_question(text)
        else:
            category = category.strip().lower()
            if category not in (FACTOID, FITB):
                raise ValueError(f"unknown question category {category!r}")
        return cls(text=text, category=category, gold_answer=gold_answer)


@dataclass
class CandidateAnswer:
    answer_text: str
    source_titles: list[str] = field(default_factory=list)
    evidence: list[SearchResult] = field(default_factory=list)
    score_vector: ScoreVector | None = None
    confidence: float | None = None
    final_rank: int | None = None


def classify_question(text: str) -> str:
    """Fill-in-the-blank iff the text contains two or more consecutive
    underscores; everything else is a factoid."""
    return FITB if _BLANK_RE.search(text) else FACTOID


def _weighted_query(text: str, cfg: RunConfig) -> Query:
    tokens = analyze(text)
    if not tokens:
        raise DegenerateQueryError(f"no query terms after analysis: {text!r}")
    clauses = [QueryClause(FIELD_CONTENT, t, cfg.content_weight) for t in tokens]
    clauses += [QueryClause(FIELD_TITLE, t, cfg.title_weight) for t in tokens]
    return Query(tuple(clauses))


def build_factoid_query(question: Question, cfg: RunConfig) -> Query:
    if question.category != FACTOID:
        raise ValueError("build_factoid_query requires a factoid question")
    return _weighted_query(question.text, cfg)


def build_fitb_query(question: Question, cfg: RunConfig) -> Query:
    if question.category != FITB:
        raise ValueError("build_fitb_query requires a fill-in-the-blank question")
    return _weighted_query(_BLANK_RE.sub(" ", question.text), cfg)


def build_query(question: Question, cfg: RunConfig) -> Query:
    if question.category == FITB:
        return build_fitb_query(question, cfg)
    return build_factoid_query(question, cfg)


def extract_fitb_answer(title: str, question: Question) -> str | None:
    """Title span between the question's first and last blank.

    The question's literal text before the first blank and after the last
    blank must align with the start and end of the title
    (case-insensitively, at word granularity); the substring they delimit
    is the answer and keeps any known text between blanks. Returns None
    when alignment fails.
    """
    blanks = list(_BLANK_RE.finditer(question.text))
    if not blanks:
        return None
    prefix_words = [w.lower() for w in
                    _WORD_RE.findall(question.text[: blanks[0].start()])]
    suffix_words = [w.lower() for w in
                    _WORD_RE.findall(question.text[blanks[-1].end():])]

    spans = [(m.group(0).lower(), m.start(), m.end())
             for m in _WORD_RE.finditer(title)]
    n_words = len(spans)
    n_edge = len(prefix_words) + len(suffix_words)
    if n_words <= n_edge:
        return None
    if [w for w, _s, _e in spans[: len(prefix_words)]] != prefix_words:
        return None
    if suffix_words and [w for w, _s, _e in spans[n_words - len(suffix_words):]] != suffix_words:
        return None
    start = spans[len(prefix_words)][1]
    end = spans[n_words - len(suffix_words) - 1][2]
    answer = title[start:end].strip()
    return answer or None


def generate_candidates(results: list[SearchResult],
                        question: Question) -> list[CandidateAnswer]:
    """One candidate per result; fill-in-the-blank answers come from title
    alignment and results that fail to align contribute nothing."""
    candidates = []
    for result in results:
        if question.category == FITB:
            answer = extract_fitb_answer(result.title, question)
            if answer is None:
                continue
        else:
            answer = result.title
        if not answer:
            continue
        candidates.append(
            CandidateAnswer(answer_text=answer, source_titles=[result.title],
                            evidence=[result])
        )
    return candidates


def merge_candidates(candidates: list[CandidateAnswer]) -> list[CandidateAnswer]:
    """Merge candidates whose answers analyze to the same token set.

    The surviving answer text is the longest raw variant; evidence lists
    are concatenated in first-seen order, so no evidence is lost.
    """
    groups: dict[frozenset, CandidateAnswer] = {}
    for cand in candidates:
        key = frozenset(analyze(cand.answer_text))
        existing = groups.get(key)
        if existing is None:
            groups[key] = CandidateAnswer(
                answer_text=cand.answer_text,
                source_titles=list(cand.source_titles),
                evidence=list(cand.evidence),
            )
            continue
        if len(cand.answer_text) > len(existing.answer_text):
            existing.answer_text = cand.answer_text
        for title in cand.source_titles:
            if title not in existing.source_titles:
                existing.source_titles.append(title)
        existing.evidence.extend(cand.evidence)
    return list(groups.values())


def _passage_query(question: Question, candidate: CandidateAnswer) -> Query | None:
    text = question.text
    if question.category == FITB:
        text = _BLANK_RE.sub(" ", text)
    terms: list[str] = []
    for term in analyze(text) + analyze(candidate.answer_text):
        if term not in terms:
            terms.append(term)
    if not terms:
        return None
    return Query(tuple(QueryClause(FIELD_PASSAGE, t, 1.0) for t in terms))


def retrieve_passages(index: InvertedIndex, question: Question,
                      candidate: CandidateAnswer, cfg: RunConfig) -> list[SearchResult]:
    """Second-stage supporting evidence: question plus candidate terms
    against the passage field, top passages per enabled passage engine."""
    query = _passage_query(question, candidate)
    if query is None:
        return []
    out: list[SearchResult] = []
    for engine in cfg.passage_engines:
        if engine == ENGINE_VSM:
            hits = search_vsm(index, query, cfg.passage_depth)
        elif engine == ENGINE_QLM:
            hits = search_qlm(index, query, cfg.passage_depth, mu=cfg.mu)
        else:
            continue
        out.extend(replace(hit, stage=STAGE_PASSAGE) for hit in hits)
    return out


def _first_stage_results(question: Question, index: InvertedIndex, cfg: RunConfig,
                         webmock: WebMockFixture | None) -> list[SearchResult]:
    query = build_query(question, cfg)
    lists: dict[str, list[SearchResult]] = {}
    engine_cfg = cfg.engine_config()
    for engine in cfg.engines:
        k = engine_cfg.per_engine_cap[engine]
        if engine == ENGINE_VSM:
            lists[engine] = search_vsm(index, query, k)
        elif engine == ENGINE_QLM:
            lists[engine] = search_qlm(index, query, k, mu=cfg.mu)
        elif engine == ENGINE_WEBMOCK:
            if webmock is None:
                raise ValueError("webmock engine enabled but no fixture loaded")
            lists[engine] = search_webmock(webmock, query, k)
        else:
            raise ValueError(f"unknown engine {engine!r}")
    return fuse_results(lists, engine_cfg)


def score_candidates(question: Question, candidates: list[CandidateAnswer],
                     index: InvertedIndex, cfg: RunConfig) -> None:
    """Retrieve supporting passages and fill each candidate's score vector."""
    layout = feature_layout(tuple(cfg.engines))
    question_tokens = analyze(_BLANK_RE.sub(" ", question.text))
    for cand in candidates:
        cand.evidence.extend(retrieve_passages(index, question, cand, cfg))
        cand_tokens = analyze(cand.answer_text)
        per_item = [
            evidence_scores(item, question_tokens, cand_tokens, phrase_cap=cfg.phrase_cap)
            for item in cand.evidence
        ]
        aggregates = aggregate_evidence(per_item)
        found_by = {item.engine_id for item in cand.evidence if item.stage == STAGE_SEARCH}
        extras = {
            f"found_by.{engine}": (1.0 if engine in found_by else 0.0)
            for engine in cfg.engines
        }
        extras["popularity"] = max(
            (index.popularity_for_title(title) for title in cand.source_titles),
            default=0.0,
        )
        cand.score_vector = assemble_feature_vector(layout, aggregates, extras)


def check_model_layout(model, cfg: RunConfig) -> None:
    """Fail fast when the run's feature layout differs from the model's.

    The layout is a pure function of the enabled engines, so a mismatch
    almost always means the engine set changed between train and apply.
    """
    from .scoring import layout_hash

    if model is None:
        return
    expected = feature_layout(tuple(cfg.engines))
    if layout_hash(expected) == model.layout_hash:
        return
    trained_engines = [e for e in (ENGINE_VSM, ENGINE_QLM, ENGINE_WEBMOCK)
                       if f"found_by.{e}" in model.layout]
    raise ValueError(
        "feature layout mismatch: the model was trained with engines "
        f"{','.join(trained_engines)} but this run enables "
        f"{','.join(cfg.engines)}; match the engine set (and webmock fixture) "
        "used at training time"
    )


def answer_question(question: Question, index: InvertedIndex, model,
                    cfg: RunConfig, webmock: WebMockFixture | None = None
                    ) -> list[CandidateAnswer]:
    """Full pipeline: classify, query, fuse, generate, merge, score, rank.

    ``model`` may be None, in which case every candidate gets confidence
    0.5 and ordering falls back to the alphabetical tie-break.
    """
    check_model_layout(model, cfg)
    fused = _first_stage_results(question, index, cfg, webmock)
    candidates = merge_candidates(generate_candidates(fused, question))
    if not candidates:
        return []
    score_candidates(question, candidates, index, cfg)
    return rank_candidates(candidates, model)


def read_questions(path: str | Path) -> list[Question]:
    """JSON Lines of {"question", "answer", "category"}; an explicit
    category overrides classification."""
    questions = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid JSON ({exc.msg})") from exc
            if not isinstance(raw, dict) or not isinstance(raw.get("question"), str):
                raise ValueError(f"{path}:{line_no}: expected a 'question' string field")
            questions.append(
                Question.make(
                    raw["question"],
                    category=raw.get("category"),
                    gold_answer=raw.get("answer"),
                )
            )
    return questions
