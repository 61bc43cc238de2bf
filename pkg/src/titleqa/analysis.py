"""Text normalization: tokenizing, stopword removal, stemming, n-gram bags.

Every piece of text that enters the index, a query, or a scorer goes
through :func:`analyze`, so candidate/answer matching and retrieval all
share one vocabulary.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .stemmer import stem

# The classic 33-word English retrieval stoplist. The exact contents are
# part of the artifact's contract: answer correctness matching depends on
# which words are dropped. Print with `titleqa --show-stopwords`.
STOPWORDS: tuple[str, ...] = (
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "if",
    "in", "into", "is", "it", "no", "not", "of", "on", "or", "such",
    "that", "the", "their", "then", "there", "these", "they", "this",
    "to", "was", "will", "with",
)
_STOPSET = frozenset(STOPWORDS)

_TOKEN_RE = re.compile(r"[a-z0-9]+")
# For span extraction, match on the original text (case-insensitively)
# so offsets stay valid even where lower() changes string length.
_TOKEN_CI_RE = re.compile(r"[a-z0-9]+", re.IGNORECASE)

UNIGRAM = "unigram"
BIGRAM = "bigram"
SKIP_BIGRAM = "skip_bigram"
TRIGRAM = "trigram"
NGRAM_KINDS = (UNIGRAM, BIGRAM, SKIP_BIGRAM, TRIGRAM)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=65536)
def _normalize(token: str) -> str | None:
    """Stem a non-stopword token to a fixed point, or None to drop it.

    A single Porter pass is not idempotent ("agree" -> "agre" -> "agr"),
    and a stem may land on a stopword ("willing" -> "will"). Iterating to
    a fixed point and re-checking the stoplist makes the whole analyzer a
    projection: analyzing its own output reproduces it exactly.
    """
    prev = token
    for _ in range(2 * len(token) + 2):
        nxt = stem(prev)
        if nxt in _STOPSET:
            return None
        if nxt == prev:
            return prev
        prev = nxt
    return prev


@lru_cache(maxsize=16384)
def analyze(text: str) -> tuple[str, ...]:
    """Normalize raw text into a stream of stemmed, stopword-free terms."""
    out = []
    for token in tokenize(text):
        if token in _STOPSET:
            continue
        term = _normalize(token)
        if term is not None:
            out.append(term)
    return tuple(out)


def analyze_spans(text: str) -> list[tuple[str, int, int]]:
    """Like :func:`analyze` but with (term, start, end) character offsets.

    Offsets point into the original text and are used to cut passage
    windows that read naturally while staying aligned with the analyzed
    token stream.
    """
    out = []
    for match in _TOKEN_CI_RE.finditer(text):
        token = match.group(0).lower()
        if token in _STOPSET:
            continue
        term = _normalize(token)
        if term is not None:
            out.append((term, match.start(), match.end()))
    return out


@dataclass(frozen=True)
class NGramBag:
    """Multiset of token tuples of one n-gram kind."""

    kind: str
    grams: Counter

    def __len__(self) -> int:
        return sum(self.grams.values())

    def distinct(self) -> frozenset:
        return frozenset(self.grams)


def extract_ngrams(stream: tuple[str, ...], kind: str) -> NGramBag:
    """Extract n-grams of the given kind; skip-bigrams skip exactly one token."""
    if kind == UNIGRAM:
        grams = [(t,) for t in stream]
    elif kind == BIGRAM:
        grams = list(zip(stream, stream[1:]))
    elif kind == SKIP_BIGRAM:
        grams = list(zip(stream, stream[2:]))
    elif kind == TRIGRAM:
        grams = list(zip(stream, stream[1:], stream[2:]))
    else:
        raise ValueError(f"unknown n-gram kind: {kind!r}")
    return NGramBag(kind=kind, grams=Counter(grams))


def token_set_match(a: str, b: str) -> bool:
    """True iff both texts analyze to the same unordered set of terms."""
    return set(analyze(a)) == set(analyze(b))
