"""Corpus ingestion: JSON Lines dumps, redirect folding, page-view popularity.

A dump line is ``{"title": str, "text": str, "redirect": str|null}``. A
record with a non-null ``redirect`` produces no document of its own; its
title becomes a synonym of the target document. Page views arrive as a
UTF-8 TSV of ``title<TAB>count`` lines.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import tokenize

log = logging.getLogger(__name__)

STORE_FORMAT = "titleqa-corpus"
STORE_VERSION = 1
MAX_REDIRECT_DEPTH = 8


class CorpusFormatError(ValueError):
    """A dump or store file violates the expected record format."""


@dataclass
class Document:
    doc_id: int
    title: str
    synonyms: list[str] = field(default_factory=list)
    body: str = ""
    popularity: float = 0.0


@dataclass
class CorpusStats:
    documents: int
    total_tokens: int


class CorpusStore:
    """Immutable-after-ingest collection of documents plus synonym lookup."""

    def __init__(self, documents: list[Document]):
        self.documents = documents
        self._by_title: dict[str, int] = {d.title: d.doc_id for d in documents}
        self.synonym_map: dict[str, int] = {}
        for doc in documents:
            for syn in doc.synonyms:
                self.synonym_map[syn] = doc.doc_id

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def stats(self) -> CorpusStats:
        return CorpusStats(
            documents=len(self.documents),
            total_tokens=sum(len(tokenize(d.body)) for d in self.documents),
        )

    def document(self, doc_id: int) -> Document:
        return self.documents[doc_id]

    def document_for_title(self, title: str) -> Document | None:
        """Resolve a primary title or synonym to its document."""
        doc_id = self._by_title.get(title)
        if doc_id is None:
            doc_id = self.synonym_map.get(title)
        return None if doc_id is None else self.documents[doc_id]

    def save(self, path: str | Path) -> None:
        payload = {
            "format": STORE_FORMAT,
            "version": STORE_VERSION,
            "documents": [
                {
                    "doc_id": d.doc_id,
                    "title": d.title,
                    "synonyms": d.synonyms,
                    "body": d.body,
                    "popularity": d.popularity,
                }
                for d in self.documents
            ],
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CorpusStore":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if raw.get("format") != STORE_FORMAT:
            raise CorpusFormatError(f"{path}: not a {STORE_FORMAT} file")
        docs = [
            Document(
                doc_id=d["doc_id"],
                title=d["title"],
                synonyms=list(d["synonyms"]),
                body=d["body"],
                popularity=float(d.get("popularity", 0.0)),
            )
            for d in raw["documents"]
        ]
        return cls(docs)


def _parse_record(line: str, line_no: int) -> tuple[str, str, str | None]:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"line {line_no}: invalid JSON ({exc.msg})") from exc
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"line {line_no}: record is not an object")
    title = raw.get("title")
    if not isinstance(title, str) or not title.strip():
        raise CorpusFormatError(f"line {line_no}: missing or empty title")
    text = raw.get("text")
    if text is None:
        text = ""
    elif not isinstance(text, str):
        raise CorpusFormatError(f"line {line_no}: text is not a string")
    redirect = raw.get("redirect")
    if redirect is not None and not isinstance(redirect, str):
        raise CorpusFormatError(f"line {line_no}: redirect is not a string or null")
    return title, text, redirect


def ingest_corpus(dump_path: str | Path) -> CorpusStore:
    """Build a CorpusStore from a JSON Lines dump.

    Redirect records are folded into their targets' synonym lists
    (following chains up to MAX_REDIRECT_DEPTH hops) and do not become
    documents. Duplicate titles: the last record wins, with a warning.
    doc_ids follow the input order of the surviving article records.
    """
    articles: dict[str, tuple[int, str]] = {}  # title -> (line_no, body)
    redirects: dict[str, str] = {}  # source title -> target title
    redirect_order: list[str] = []

    with open(dump_path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            title, text, redirect = _parse_record(line, line_no)
            if redirect is not None:
                if title in redirects:
                    log.warning("line %d: duplicate redirect source %r, last wins", line_no, title)
                else:
                    redirect_order.append(title)
                redirects[title] = redirect
            else:
                if title in articles:
                    log.warning("line %d: duplicate title %r, last record wins", line_no, title)
                articles[title] = (line_no, text)

    ordered = sorted(articles.items(), key=lambda item: item[1][0])
    documents = [
        Document(doc_id=i, title=title, body=body)
        for i, (title, (_line, body)) in enumerate(ordered)
    ]
    by_title = {d.title: d for d in documents}

    for source in redirect_order:
        target = redirects[source]
        hops = 0
        while target in redirects and target not in by_title:
            target = redirects[target]
            hops += 1
            if hops >= MAX_REDIRECT_DEPTH:
                break
        doc = by_title.get(target)
        if doc is None:
            log.warning("redirect %r -> %r dropped: target not found", source, target)
            continue
        if source == doc.title:
            log.warning("redirect %r dropped: synonym equals primary title", source)
            continue
        if source not in doc.synonyms:
            doc.synonyms.append(source)

    return CorpusStore(documents)


class PageViewStats:
    """Per-title view counts; absent titles read as zero."""

    def __init__(self, views: dict[str, int] | None = None):
        self.views = views or {}

    def count(self, title: str) -> int:
        return self.views.get(title, 0)


def load_pageviews(tsv_path: str | Path) -> PageViewStats:
    """Load ``title<TAB>count`` lines, summing counts across duplicates."""
    views: dict[str, int] = {}
    with open(tsv_path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                log.warning("pageviews line %d skipped: expected title<TAB>count", line_no)
                continue
            title, raw_count = parts
            try:
                count = int(raw_count)
            except ValueError:
                log.warning("pageviews line %d skipped: non-integer count %r", line_no, raw_count)
                continue
            if count < 0:
                log.warning("pageviews line %d skipped: negative count", line_no)
                continue
            views[title] = views.get(title, 0) + count
    return PageViewStats(views)


def popularity_score(stats: PageViewStats, title: str) -> float:
    """ln(1 + views), taming the heavy tail of raw view counts."""
    return math.log1p(stats.count(title))


def attach_popularity(store: CorpusStore, stats: PageViewStats) -> None:
    """Fill each document's popularity from its primary title's view count."""
    for doc in store.documents:
        doc.popularity = popularity_score(stats, doc.title)
