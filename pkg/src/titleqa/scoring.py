"""Evidence scorers and the fixed-order feature vector.

Each evidence passage is scored against both the question text and the
candidate answer text (distinct n-gram intersections plus a
length-weighted common-phrase count). Engine rank/native scores come
from the search results that produced the candidate. Per-candidate
aggregation takes the minimum, maximum, and mean of every scorer across
the candidate's evidence.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

from .analysis import analyze
from .search import ENGINE_ORDER, ENGINE_WEBMOCK, STAGE_SEARCH, SearchResult

PHRASE_MAX_LEN = 12

_PAIR_PREFIXES = ("q", "c")  # question-side and candidate-side dimensions
_OVERLAP_NAMES = ("uni", "uni_rel", "bi", "skip", "tri")


def _distinct_grams(stream: tuple[str, ...], n: int, skip: bool = False) -> frozenset:
    if skip:
        return frozenset(zip(stream, stream[2:]))
    if n == 1:
        return frozenset(stream)
    if n == 2:
        return frozenset(zip(stream, stream[1:]))
    return frozenset(zip(stream, stream[1:], stream[2:]))


def _overlap(a: tuple[str, ...], b: tuple[str, ...]) -> tuple[float, float, float, float, float]:
    uni = len(_distinct_grams(a, 1) & _distinct_grams(b, 1))
    denom = len(a) + len(b)
    uni_rel = uni / denom if denom else 0.0
    bi = len(_distinct_grams(a, 2) & _distinct_grams(b, 2))
    sk = len(_distinct_grams(a, 2, skip=True) & _distinct_grams(b, 2, skip=True))
    tri = len(_distinct_grams(a, 3) & _distinct_grams(b, 3))
    return float(uni), uni_rel, float(bi), float(sk), float(tri)


def ngram_overlap_scores(passage: tuple[str, ...], question: tuple[str, ...],
                         candidate: tuple[str, ...]) -> dict[str, float]:
    """Common-n-gram counts of the passage against question and candidate.

    Unigrams also get a relative frequency: count over the summed lengths
    of the two streams. Counts are over distinct grams, so repeating a
    passage does not inflate them.
    """
    out: dict[str, float] = {}
    for prefix, other in (("q", question), ("c", candidate)):
        values = _overlap(passage, other)
        for name, value in zip(_OVERLAP_NAMES, values):
            out[f"{prefix}.{name}"] = value
    return out


def common_phrase_score(a: tuple[str, ...], b: tuple[str, ...],
                        max_len: int = PHRASE_MAX_LEN) -> float:
    """Total distinct contiguous k-grams (k >= 2) shared by both streams.

    A shared phrase of length L contributes its whole sub-phrase pyramid
    ((L-1) + (L-2) + ... + 1), so longer agreements weigh more. k is
    capped to bound cost on pathological inputs; absence of common
    k-grams implies absence for k+1, so the loop stops early.
    """
    limit = min(len(a), len(b), max_len)
    total = 0
    for k in range(2, limit + 1):
        grams_a = frozenset(tuple(a[i:i + k]) for i in range(len(a) - k + 1))
        grams_b = frozenset(tuple(b[i:i + k]) for i in range(len(b) - k + 1))
        common = len(grams_a & grams_b)
        if common == 0:
            break
        total += common
    return float(total)


def engine_rank_scores(result: SearchResult) -> dict[str, float]:
    """Reciprocal rank plus the native score when the engine provides one."""
    if result.rank < 1:
        raise ValueError("result rank must be >= 1")
    out = {f"rank_recip.{result.engine_id}": 1.0 / result.rank}
    if result.native_score is not None:
        out[f"native.{result.engine_id}"] = result.native_score
    return out


def evidence_scores(result: SearchResult, question: tuple[str, ...],
                    candidate: tuple[str, ...], phrase_cap: int = PHRASE_MAX_LEN,
                    passage_tokens: tuple[str, ...] | None = None) -> dict[str, float]:
    """Every scorer's value for one evidence item.

    Rank and native-score dimensions only apply to first-stage search
    results; supporting passages retrieved for an already-generated
    candidate contribute text-overlap evidence only.
    """
    passage = analyze(result.text) if passage_tokens is None else passage_tokens
    scores = ngram_overlap_scores(passage, question, candidate)
    scores["q.phrase"] = common_phrase_score(passage, question, phrase_cap)
    scores["c.phrase"] = common_phrase_score(passage, candidate, phrase_cap)
    if result.stage == STAGE_SEARCH:
        scores.update(engine_rank_scores(result))
    return scores


def aggregate_evidence(per_passage: list[dict[str, float]]) -> dict[str, float]:
    """Min/max/mean of every scorer dimension across a candidate's evidence.

    A dimension absent from an item (for example another engine's rank)
    aggregates over the items where it is present.
    """
    if not per_passage:
        raise ValueError("a candidate must have at least one evidence item")
    grouped: dict[str, list[float]] = {}
    for scores in per_passage:
        for name, value in scores.items():
            grouped.setdefault(name, []).append(value)
    out: dict[str, float] = {}
    for name, values in grouped.items():
        out[f"{name}.min"] = min(values)
        out[f"{name}.max"] = max(values)
        out[f"{name}.mean"] = sum(values) / len(values)
    return out


@dataclass(frozen=True)
class ScoreVector:
    values: tuple[float, ...]
    layout: tuple[str, ...]


@lru_cache(maxsize=64)
def feature_layout(engines: tuple[str, ...]) -> tuple[str, ...]:
    """The run's frozen dimension list, sorted lexicographically.

    Built from the configured engines (not from observed data) so the
    layout is identical across candidates and across train/eval phases.
    """
    per_passage = [f"{p}.{n}" for p in _PAIR_PREFIXES for n in _OVERLAP_NAMES]
    per_passage += [f"{p}.phrase" for p in _PAIR_PREFIXES]
    for engine in ENGINE_ORDER:
        if engine not in engines:
            continue
        per_passage.append(f"rank_recip.{engine}")
        if engine != ENGINE_WEBMOCK:
            per_passage.append(f"native.{engine}")
    dims = [f"{name}.{agg}" for name in per_passage for agg in ("min", "max", "mean")]
    dims.append("popularity")
    dims.extend(f"found_by.{engine}" for engine in ENGINE_ORDER if engine in engines)
    return tuple(sorted(dims))


def layout_hash(layout: tuple[str, ...]) -> str:
    return hashlib.sha256("\n".join(layout).encode("utf-8")).hexdigest()


def assemble_feature_vector(layout: tuple[str, ...], aggregates: dict[str, float],
                            extras: dict[str, float]) -> ScoreVector:
    """Fill the frozen layout; missing dimensions become 0.

    Dimension names outside the layout are an error: they would silently
    vanish and desynchronize training from evaluation.
    """
    allowed = set(layout)
    for name in aggregates:
        if name not in allowed:
            raise ValueError(f"aggregate dimension {name!r} not in frozen layout")
    for name in extras:
        if name not in allowed:
            raise ValueError(f"extra dimension {name!r} not in frozen layout")
    merged = dict(aggregates)
    merged.update(extras)
    return ScoreVector(values=tuple(merged.get(name, 0.0) for name in layout), layout=layout)
