from __future__ import annotations

from pathlib import Path

import pytest

from titleqa.config import RunConfig
from titleqa.corpus import attach_popularity, ingest_corpus, load_pageviews
from titleqa.pipeline import read_questions
from titleqa.search import WebMockFixture, build_index

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def tiny_store():
    return ingest_corpus(DATA_DIR / "tiny_corpus.jsonl")


@pytest.fixture(scope="session")
def tiny_index(tiny_store):
    return build_index(tiny_store)


@pytest.fixture(scope="session")
def tiny_questions():
    return read_questions(DATA_DIR / "tiny_questions.jsonl")


@pytest.fixture(scope="session")
def mini_store():
    store = ingest_corpus(DATA_DIR / "mini_corpus.jsonl")
    attach_popularity(store, load_pageviews(DATA_DIR / "mini_pageviews.tsv"))
    return store


@pytest.fixture(scope="session")
def mini_index(mini_store):
    return build_index(mini_store)


@pytest.fixture(scope="session")
def mini_index_nosyn(mini_store):
    return build_index(mini_store, include_synonyms=False)


@pytest.fixture(scope="session")
def mini_questions():
    return read_questions(DATA_DIR / "mini_questions.jsonl")


@pytest.fixture(scope="session")
def mini_webmock():
    return WebMockFixture.from_file(DATA_DIR / "mini_webmock.jsonl")


@pytest.fixture()
def default_config() -> RunConfig:
    return RunConfig()
