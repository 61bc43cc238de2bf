"""Inverted index over title/content/passage fields plus three engines.

Two local ranking backends share the index: a tf-idf vector space model
(``vsm``) and a Dirichlet-smoothed query likelihood model (``qlm``). A
third engine (``webmock``) replays canned, rank-ordered results from a
fixture file and carries no native scores, standing in for a remote web
engine so cap and fusion logic stays exercised offline.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import analyze, analyze_spans
from .corpus import CorpusStore

log = logging.getLogger(__name__)

ENGINE_VSM = "vsm"
ENGINE_QLM = "qlm"
ENGINE_WEBMOCK = "webmock"
ENGINE_ORDER = (ENGINE_VSM, ENGINE_QLM, ENGINE_WEBMOCK)

FIELD_TITLE = "title"
FIELD_CONTENT = "content"
FIELD_PASSAGE = "passage"
DOC_FIELDS = (FIELD_TITLE, FIELD_CONTENT)

INDEX_MAGIC = "titleqa-index 1"

DEFAULT_MU = 2000.0
DEFAULT_WINDOW = 50
DEFAULT_STRIDE = 25

STAGE_SEARCH = "search"
STAGE_PASSAGE = "passage"


@dataclass(frozen=True)
class QueryClause:
    field: str
    term: str
    weight: float


@dataclass(frozen=True)
class Query:
    clauses: tuple[QueryClause, ...]

    def terms(self) -> tuple[str, ...]:
        """Sorted distinct clause terms; the lookup key for the web mock."""
        return tuple(sorted({c.term for c in self.clauses}))


@dataclass
class SearchResult:
    engine_id: str
    unit_id: int | None
    title: str
    text: str
    rank: int
    native_score: float | None
    stage: str = STAGE_SEARCH


@dataclass
class EngineConfig:
    """Result caps and retrieval knobs; caps apply per engine, then in total."""

    per_engine_cap: dict[str, int] = field(
        default_factory=lambda: {ENGINE_VSM: 20, ENGINE_QLM: 20, ENGINE_WEBMOCK: 50}
    )
    total_cap: int = 90
    mu: float = DEFAULT_MU
    title_weight: float = 0.3
    content_weight: float = 1.0


@dataclass
class Passage:
    passage_id: int
    doc_id: int
    text: str
    offset: int  # position of the window start in the doc's analyzed stream


class _FieldIndex:
    """Postings, unit lengths, and collection statistics for one field."""

    def __init__(self) -> None:
        self.postings: dict[str, list[tuple[int, int]]] = {}
        self.lengths: dict[int, int] = {}
        self.total_tokens = 0
        self._arrays: dict | None = None

    def add_unit(self, unit_id: int, tokens: tuple[str, ...] | list[str]) -> None:
        if unit_id in self.lengths:
            raise ValueError(f"unit {unit_id} already indexed in this field")
        counts: dict[str, int] = {}
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
        for term, tf in counts.items():
            self.postings.setdefault(term, []).append((unit_id, tf))
        self.lengths[unit_id] = len(tokens)
        self.total_tokens += len(tokens)
        self._arrays = None

    @property
    def unit_count(self) -> int:
        return len(self.lengths)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def collection_freq(self, term: str) -> int:
        return sum(tf for _unit, tf in self.postings.get(term, ()))

    def arrays(self) -> dict:
        """Dense per-unit arrays plus per-term posting arrays, built lazily."""
        if self._arrays is None:
            unit_ids = np.array(sorted(self.lengths), dtype=np.int64)
            pos = {int(u): i for i, u in enumerate(unit_ids)}
            lengths = np.array([self.lengths[int(u)] for u in unit_ids], dtype=np.float64)
            n = len(unit_ids)
            norms = np.zeros(n, dtype=np.float64)
            for term, plist in self.postings.items():
                idf = math.log(n / len(plist)) if n else 0.0
                if idf == 0.0:
                    continue
                for unit, tf in plist:
                    norms[pos[unit]] += (tf * idf) ** 2
            np.sqrt(norms, out=norms)
            term_arrays = {
                term: (
                    np.array([pos[u] for u, _tf in plist], dtype=np.int64),
                    np.array([tf for _u, tf in plist], dtype=np.float64),
                )
                for term, plist in self.postings.items()
            }
            self._arrays = {
                "unit_ids": unit_ids,
                "lengths": lengths,
                "norms": norms,
                "terms": term_arrays,
            }
        return self._arrays


class InvertedIndex:
    """Field-partitioned index; title/content share the document unit space,
    passages have their own."""

    def __init__(self) -> None:
        self.fields: dict[str, _FieldIndex] = {
            FIELD_TITLE: _FieldIndex(),
            FIELD_CONTENT: _FieldIndex(),
            FIELD_PASSAGE: _FieldIndex(),
        }
        self.passages: list[Passage] = []
        self.doc_titles: dict[int, str] = {}
        self.doc_excerpts: dict[int, str] = {}
        self.doc_popularity: dict[int, float] = {}
        self.title_to_doc: dict[str, int] = {}
        self.include_synonyms = True

    def add_unit(self, field_name: str, unit_id: int, tokens) -> None:
        self.fields[field_name].add_unit(unit_id, tokens)

    def register_doc(self, doc_id: int, title: str, excerpt: str, popularity: float) -> None:
        self.doc_titles[doc_id] = title
        self.doc_excerpts[doc_id] = excerpt
        self.doc_popularity[doc_id] = popularity
        self.title_to_doc.setdefault(title, doc_id)

    def popularity_for_title(self, title: str) -> float:
        doc_id = self.title_to_doc.get(title)
        return self.doc_popularity.get(doc_id, 0.0) if doc_id is not None else 0.0

    def _unit_result(self, field_name: str, unit_id: int, rank: int,
                     score: float, engine: str) -> SearchResult:
        if field_name == FIELD_PASSAGE:
            passage = self.passages[unit_id]
            return SearchResult(
                engine_id=engine,
                unit_id=unit_id,
                title=self.doc_titles.get(passage.doc_id, ""),
                text=passage.text,
                rank=rank,
                native_score=score,
            )
        return SearchResult(
            engine_id=engine,
            unit_id=unit_id,
            title=self.doc_titles.get(unit_id, ""),
            text=self.doc_excerpts.get(unit_id, ""),
            rank=rank,
            native_score=score,
        )

    # -- persistence ----------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "include_synonyms": self.include_synonyms,
            "fields": {
                name: {
                    "postings": {t: [[u, tf] for u, tf in plist]
                                 for t, plist in fx.postings.items()},
                    "lengths": {str(u): n for u, n in fx.lengths.items()},
                    "total_tokens": fx.total_tokens,
                }
                for name, fx in self.fields.items()
            },
            "passages": [[p.passage_id, p.doc_id, p.text, p.offset] for p in self.passages],
            "docs": [
                [doc_id, self.doc_titles[doc_id], self.doc_excerpts[doc_id],
                 self.doc_popularity[doc_id]]
                for doc_id in sorted(self.doc_titles)
            ],
            "synonym_titles": {t: d for t, d in self.title_to_doc.items()
                               if self.doc_titles.get(d) != t},
        }
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(INDEX_MAGIC + "\n")
            json.dump(payload, handle, sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        with open(path, encoding="utf-8") as handle:
            magic = handle.readline().rstrip("\n")
            if magic != INDEX_MAGIC:
                raise ValueError(f"{path}: not a recognized index file (header {magic!r})")
            payload = json.load(handle)
        index = cls()
        index.include_synonyms = payload["include_synonyms"]
        for name, data in payload["fields"].items():
            fx = index.fields[name]
            fx.postings = {t: [(int(u), int(tf)) for u, tf in plist]
                           for t, plist in data["postings"].items()}
            fx.lengths = {int(u): int(n) for u, n in data["lengths"].items()}
            fx.total_tokens = int(data["total_tokens"])
        index.passages = [Passage(*row) for row in payload["passages"]]
        for doc_id, title, excerpt, popularity in payload["docs"]:
            index.register_doc(int(doc_id), title, excerpt, float(popularity))
        for title, doc_id in payload["synonym_titles"].items():
            index.title_to_doc.setdefault(title, int(doc_id))
        return index


def build_index(store: CorpusStore, include_synonyms: bool = True,
                window: int = DEFAULT_WINDOW, stride: int = DEFAULT_STRIDE) -> InvertedIndex:
    """Index titles (plus synonyms), bodies, and overlapping passage windows.

    Passage windows cover ``window`` analyzed tokens at ``stride`` token
    steps; the final window may be short. Window text is cut from the
    original body so evidence snippets read naturally.
    """
    if len(store) == 0:
        raise ValueError("cannot build an index over an empty corpus")
    index = InvertedIndex()
    index.include_synonyms = include_synonyms
    passage_id = 0
    for doc in store.documents:
        title_tokens = list(analyze(doc.title))
        if include_synonyms:
            for synonym in doc.synonyms:
                title_tokens.extend(analyze(synonym))
        spans = analyze_spans(doc.body)
        content_tokens = tuple(term for term, _s, _e in spans)

        index.add_unit(FIELD_TITLE, doc.doc_id, title_tokens)
        index.add_unit(FIELD_CONTENT, doc.doc_id, content_tokens)
        index.register_doc(doc.doc_id, doc.title, doc.body[:240], doc.popularity)
        if include_synonyms:
            for synonym in doc.synonyms:
                index.title_to_doc.setdefault(synonym, doc.doc_id)

        for offset in range(0, len(spans), stride):
            window_spans = spans[offset:offset + window]
            text = doc.body[window_spans[0][1]:window_spans[-1][2]]
            index.passages.append(Passage(passage_id, doc.doc_id, text, offset))
            index.add_unit(FIELD_PASSAGE, passage_id,
                           tuple(term for term, _s, _e in window_spans))
            passage_id += 1
    return index


def _query_field(query: Query) -> str:
    """Unit space of a query: passage clauses may not mix with doc clauses."""
    fields = {c.field for c in query.clauses}
    if FIELD_PASSAGE in fields and fields != {FIELD_PASSAGE}:
        raise ValueError("a query may not mix passage clauses with document clauses")
    return FIELD_PASSAGE if fields == {FIELD_PASSAGE} else "doc"


def _top_k(scores: np.ndarray, unit_ids: np.ndarray, k: int) -> list[tuple[int, float]]:
    """Top-k by score descending, ties by unit id ascending."""
    order = np.lexsort((unit_ids, -scores))
    out = []
    for idx in order[:k]:
        out.append((int(unit_ids[idx]), float(scores[idx])))
    return out


def search_vsm(index: InvertedIndex, query: Query, k: int,
               engine_id: str = ENGINE_VSM) -> list[SearchResult]:
    """Length-normalized tf-idf scoring; zero-score units are omitted."""
    if k < 1:
        raise ValueError("k must be >= 1")
    space = _query_field(query)
    field_names = (FIELD_PASSAGE,) if space == FIELD_PASSAGE else DOC_FIELDS

    combined: dict[int, float] = {}
    for name in field_names:
        fx = index.fields[name]
        arr = fx.arrays()
        n = fx.unit_count
        if n == 0:
            continue
        scores = np.zeros(n, dtype=np.float64)
        hit = False
        for clause in query.clauses:
            if clause.field != name:
                continue
            entry = arr["terms"].get(clause.term)
            if entry is None:
                continue
            idx_arr, tf_arr = entry
            idf = math.log(n / len(idx_arr))
            if idf == 0.0:
                continue
            scores[idx_arr] += clause.weight * tf_arr * idf
            hit = True
        if not hit:
            continue
        norms = arr["norms"]
        nz = (scores != 0.0) & (norms > 0.0)
        unit_ids = arr["unit_ids"]
        for i in np.nonzero(nz)[0]:
            unit = int(unit_ids[i])
            combined[unit] = combined.get(unit, 0.0) + float(scores[i] / norms[i])

    ranked = sorted(combined.items(), key=lambda item: (-item[1], item[0]))[:k]
    field_for_result = FIELD_PASSAGE if space == FIELD_PASSAGE else FIELD_CONTENT
    return [
        index._unit_result(field_for_result, unit, rank, score, engine_id)
        for rank, (unit, score) in enumerate(ranked, start=1)
    ]


def search_qlm(index: InvertedIndex, query: Query, k: int, mu: float = DEFAULT_MU,
               engine_id: str = ENGINE_QLM) -> list[SearchResult]:
    """Dirichlet-smoothed query likelihood.

    Each clause scores ``ln((tf + mu * P(t|C)) / (|u| + mu))`` against
    every unit of its field; clauses whose term is absent from the whole
    field are skipped. Queries with no surviving clause return nothing.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if mu <= 0:
        raise ValueError("mu must be positive")
    space = _query_field(query)
    field_names = (FIELD_PASSAGE,) if space == FIELD_PASSAGE else DOC_FIELDS

    # All fields of one unit space share a unit universe; missing units
    # behave as empty (length 0) in that field.
    if space == FIELD_PASSAGE:
        universe = sorted(index.fields[FIELD_PASSAGE].lengths)
    else:
        universe = sorted(
            set(index.fields[FIELD_TITLE].lengths) | set(index.fields[FIELD_CONTENT].lengths)
        )
    if not universe:
        return []
    unit_ids = np.array(universe, dtype=np.int64)
    pos = {u: i for i, u in enumerate(universe)}
    total = np.zeros(len(universe), dtype=np.float64)
    any_clause = False

    for name in field_names:
        fx = index.fields[name]
        if fx.total_tokens == 0:
            continue
        clauses = [c for c in query.clauses if c.field == name and fx.df(c.term) > 0]
        if not clauses:
            continue
        any_clause = True
        lengths = np.zeros(len(universe), dtype=np.float64)
        for unit, length in fx.lengths.items():
            lengths[pos[unit]] = length
        log_len = np.log(lengths + mu)
        weight_sum = 0.0
        const = 0.0
        field_scores = np.zeros(len(universe), dtype=np.float64)
        for clause in clauses:
            p_bg = fx.collection_freq(clause.term) / fx.total_tokens
            const += clause.weight * math.log(mu * p_bg)
            weight_sum += clause.weight
            base = math.log(mu * p_bg)
            for unit, tf in fx.postings[clause.term]:
                field_scores[pos[unit]] += clause.weight * (math.log(tf + mu * p_bg) - base)
        total += field_scores + const - weight_sum * log_len

    if not any_clause:
        return []
    ranked = _top_k(total, unit_ids, k)
    field_for_result = FIELD_PASSAGE if space == FIELD_PASSAGE else FIELD_CONTENT
    return [
        index._unit_result(field_for_result, unit, rank, score, engine_id)
        for rank, (unit, score) in enumerate(ranked, start=1)
    ]


class WebMockFixture:
    """Canned results keyed by the sorted distinct terms of a query.

    Fixture lines look like
    ``{"query_terms": [...], "results": [{"title":..., "text":...}, ...]}``
    with results already in rank order.
    """

    def __init__(self, entries: dict[tuple[str, ...], list[dict]]):
        self.entries = entries

    @classmethod
    def from_file(cls, path: str | Path) -> "WebMockFixture":
        entries: dict[tuple[str, ...], list[dict]] = {}
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                raw = json.loads(line)
                key = tuple(sorted(set(raw["query_terms"])))
                if key in entries:
                    log.warning("webmock fixture line %d: duplicate query key, last wins", line_no)
                entries[key] = list(raw["results"])
        return cls(entries)

    def lookup(self, terms: tuple[str, ...]) -> list[dict]:
        return self.entries.get(terms, [])


def search_webmock(fixture: WebMockFixture | str | Path, query: Query,
                   k: int) -> list[SearchResult]:
    """Replay the fixture's rank-ordered results; no native scores."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not isinstance(fixture, WebMockFixture):
        fixture = WebMockFixture.from_file(fixture)
    rows = fixture.lookup(query.terms())[:k]
    return [
        SearchResult(
            engine_id=ENGINE_WEBMOCK,
            unit_id=None,
            title=row.get("title", ""),
            text=row.get("text", ""),
            rank=rank,
            native_score=None,
        )
        for rank, row in enumerate(rows, start=1)
    ]


def fuse_results(lists: dict[str, list[SearchResult]],
                 cfg: EngineConfig) -> list[SearchResult]:
    """Cap each engine's list, then round-robin interleave in fixed engine
    order until the total cap is reached. Same-unit hits from different
    engines stay distinct; merging happens at the candidate level."""
    capped: list[list[SearchResult]] = []
    for engine in ENGINE_ORDER:
        results = lists.get(engine)
        if not results:
            continue
        cap = cfg.per_engine_cap.get(engine, len(results))
        capped.append(results[:cap])
    fused: list[SearchResult] = []
    depth = 0
    while len(fused) < cfg.total_cap:
        emitted = False
        for results in capped:
            if depth < len(results):
                fused.append(results[depth])
                emitted = True
                if len(fused) >= cfg.total_cap:
                    break
        if not emitted:
            break
        depth += 1
    return fused
