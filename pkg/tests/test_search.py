import json
import math
import random

import pytest

from titleqa.corpus import CorpusStore, Document
from titleqa.search import (
    ENGINE_QLM,
    ENGINE_VSM,
    ENGINE_WEBMOCK,
    FIELD_CONTENT,
    FIELD_PASSAGE,
    FIELD_TITLE,
    EngineConfig,
    InvertedIndex,
    Query,
    QueryClause,
    SearchResult,
    WebMockFixture,
    build_index,
    fuse_results,
    search_qlm,
    search_vsm,
    search_webmock,
)


def store_from(docs):
    return CorpusStore([
        Document(doc_id=i, title=title, synonyms=list(synonyms), body=body)
        for i, (title, synonyms, body) in enumerate(docs)
    ])


def content_query(*terms, weight=1.0):
    return Query(tuple(QueryClause(FIELD_CONTENT, t, weight) for t in terms))


class TestBuildIndex:
    def test_passage_window_arithmetic(self):
        body = " ".join(f"tok{i}" for i in range(60))
        store = store_from([("Doc", (), body)])
        index = build_index(store)
        offsets = [p.offset for p in index.passages]
        assert offsets == [0, 25, 50]
        lengths = [index.fields[FIELD_PASSAGE].lengths[p.passage_id]
                   for p in index.passages]
        assert lengths == [50, 35, 10]

    def test_synonym_indexed_into_title_field(self):
        store = store_from([("Museum of Modern Art", ("MOMA",), "galleries and art")])
        index = build_index(store)
        query = Query((QueryClause(FIELD_TITLE, "moma", 1.0),))
        # idf is zero in a 1-doc corpus, so check the posting directly
        assert index.fields[FIELD_TITLE].df("moma") == 1
        results = search_qlm(index, query, k=3)
        assert results and results[0].title == "Museum of Modern Art"

    def test_synonyms_can_be_excluded(self):
        store = store_from([("Museum of Modern Art", ("MOMA",), "galleries")])
        index = build_index(store, include_synonyms=False)
        assert index.fields[FIELD_TITLE].df("moma") == 0

    def test_empty_body_doc(self):
        store = store_from([("Just a Title", (), "")])
        index = build_index(store)
        assert index.fields[FIELD_TITLE].df("titl") == 1
        assert index.fields[FIELD_CONTENT].lengths[0] == 0
        assert index.passages == []

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_index(CorpusStore([]))

    def test_round_trip(self, tmp_path):
        store = store_from([
            ("Alpha Hall", ("The Hall",), "granite steps and bronze doors"),
            ("Beta House", (), "timber beams above the cellar"),
        ])
        index = build_index(store)
        path = tmp_path / "index.json"
        index.save(path)
        loaded = InvertedIndex.load(path)
        query = content_query("granit", "timber")
        before = [(r.unit_id, r.rank, r.native_score) for r in search_vsm(index, query, 5)]
        after = [(r.unit_id, r.rank, r.native_score) for r in search_vsm(loaded, query, 5)]
        assert before == after
        assert loaded.title_to_doc["The Hall"] == 0

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "index.json"
        path.write_text("something else\n{}", encoding="utf-8")
        with pytest.raises(ValueError, match="header"):
            InvertedIndex.load(path)


class TestVsm:
    def test_term_in_every_unit_contributes_nothing(self):
        store = store_from([
            ("A", (), "shared alpha"),
            ("B", (), "shared beta"),
        ])
        index = build_index(store)
        assert search_vsm(index, content_query("share"), 5) == []

    def test_single_hit_ranks_first_and_only(self):
        store = store_from([
            ("A", (), "unique marker here"),
            ("B", (), "nothing relevant"),
        ])
        index = build_index(store)
        results = search_vsm(index, content_query("marker"), 5)
        assert len(results) == 1
        assert results[0].rank == 1
        assert results[0].title == "A"
        assert results[0].native_score is not None

    def test_empty_clause_list_yields_empty(self):
        store = store_from([("A", (), "alpha")])
        index = build_index(store)
        assert search_vsm(index, Query(()), 5) == []

    def test_k_must_be_positive(self):
        store = store_from([("A", (), "alpha")])
        index = build_index(store)
        with pytest.raises(ValueError):
            search_vsm(index, content_query("alpha"), 0)


class TestQlm:
    def test_hand_value(self):
        index = InvertedIndex()
        index.add_unit(FIELD_CONTENT, 0, ["a", "b"])
        index.register_doc(0, "Doc", "a b", 0.0)
        results = search_qlm(index, content_query("a"), k=1, mu=2000.0)
        assert results[0].native_score == pytest.approx(math.log(1001 / 2002), abs=1e-6)
        assert results[0].native_score == pytest.approx(-0.69315, abs=1e-5)

    def test_out_of_vocabulary_clause_skipped(self):
        store = store_from([("A", (), "alpha beta"), ("B", (), "alpha gamma")])
        index = build_index(store)
        with_unknown = search_qlm(index, content_query("beta", "zzz"), 5)
        without = search_qlm(index, content_query("beta"), 5)
        assert [(r.unit_id, r.native_score) for r in with_unknown] == [
            (r.unit_id, r.native_score) for r in without
        ]

    def test_all_absent_query_is_empty(self):
        store = store_from([("A", (), "alpha")])
        index = build_index(store)
        assert search_qlm(index, content_query("zzz"), 5) == []

    def test_identical_units_tie_broken_by_unit_id(self):
        index = InvertedIndex()
        for unit in (0, 1, 2):
            index.add_unit(FIELD_CONTENT, unit, ["same", "tokens"])
            index.register_doc(unit, f"D{unit}", "", 0.0)
        results = search_qlm(index, content_query("same"), 3)
        assert [r.unit_id for r in results] == [0, 1, 2]
        assert results[0].native_score == pytest.approx(results[2].native_score)


class TestWebMock:
    def make_fixture(self, tmp_path, n_results, terms=("alpha", "beta")):
        path = tmp_path / "webmock.jsonl"
        entry = {
            "query_terms": list(terms),
            "results": [{"title": f"T{i}", "text": f"text {i}"} for i in range(n_results)],
        }
        path.write_text(json.dumps(entry) + "\n", encoding="utf-8")
        return path

    def test_truncates_to_k_without_scores(self, tmp_path):
        path = self.make_fixture(tmp_path, 7)
        results = search_webmock(path, content_query("beta", "alpha"), k=5)
        assert [r.rank for r in results] == [1, 2, 3, 4, 5]
        assert all(r.native_score is None for r in results)
        assert all(r.engine_id == ENGINE_WEBMOCK for r in results)

    def test_unseen_query_is_empty(self, tmp_path):
        path = self.make_fixture(tmp_path, 3)
        assert search_webmock(path, content_query("unseen"), k=5) == []

    def test_per_engine_cap_applies(self, tmp_path):
        path = self.make_fixture(tmp_path, 60)
        fixture = WebMockFixture.from_file(path)
        results = search_webmock(fixture, content_query("beta", "alpha"), k=50)
        assert len(results) == 50


def make_results(engine, n):
    return [
        SearchResult(engine_id=engine, unit_id=i, title=f"{engine}{i}", text="",
                     rank=i + 1, native_score=None if engine == ENGINE_WEBMOCK else 1.0)
        for i in range(n)
    ]


class TestFusion:
    def test_per_engine_cap(self):
        cfg = EngineConfig(per_engine_cap={ENGINE_VSM: 20}, total_cap=90)
        fused = fuse_results({ENGINE_VSM: make_results(ENGINE_VSM, 30)}, cfg)
        assert len(fused) == 20

    def test_total_cap_over_three_engines(self):
        cfg = EngineConfig()
        fused = fuse_results(
            {
                ENGINE_WEBMOCK: make_results(ENGINE_WEBMOCK, 50),
                ENGINE_VSM: make_results(ENGINE_VSM, 20),
                ENGINE_QLM: make_results(ENGINE_QLM, 20),
            },
            cfg,
        )
        assert len(fused) == 90

    def test_caps_not_binding(self):
        cfg = EngineConfig(per_engine_cap={ENGINE_VSM: 20}, total_cap=90)
        fused = fuse_results({ENGINE_VSM: make_results(ENGINE_VSM, 5)}, cfg)
        assert len(fused) == 5

    def test_round_robin_in_fixed_engine_order(self):
        cfg = EngineConfig(per_engine_cap={ENGINE_VSM: 2, ENGINE_QLM: 2,
                                           ENGINE_WEBMOCK: 2}, total_cap=10)
        fused = fuse_results(
            {
                ENGINE_QLM: make_results(ENGINE_QLM, 2),
                ENGINE_WEBMOCK: make_results(ENGINE_WEBMOCK, 2),
                ENGINE_VSM: make_results(ENGINE_VSM, 2),
            },
            cfg,
        )
        assert [r.title for r in fused] == ["vsm0", "qlm0", "webmock0",
                                            "vsm1", "qlm1", "webmock1"]

    def test_length_bound_property(self):
        rng = random.Random(7)
        for _ in range(50):
            caps = {e: rng.randint(1, 8) for e in (ENGINE_VSM, ENGINE_QLM, ENGINE_WEBMOCK)}
            total = rng.randint(1, 20)
            cfg = EngineConfig(per_engine_cap=caps, total_cap=total)
            lists = {e: make_results(e, rng.randint(0, 10))
                     for e in (ENGINE_VSM, ENGINE_QLM, ENGINE_WEBMOCK)}
            fused = fuse_results(lists, cfg)
            assert len(fused) <= min(total, sum(caps.values()))


def random_corpus(rng, n_docs=16):
    vocab = [f"w{i}" for i in range(30)]
    docs = []
    for i in range(n_docs):
        body = " ".join(rng.choices(vocab, k=rng.randint(5, 40)))
        docs.append((f"Doc {i} x{i}", (), body))
    return store_from(docs)


class TestEngineProperties:
    def test_prefix_stability(self):
        rng = random.Random(11)
        store = random_corpus(rng)
        index = build_index(store)
        for _ in range(20):
            terms = rng.sample([f"w{i}" for i in range(30)], k=3)
            query = content_query(*terms)
            for engine in (search_vsm, search_qlm):
                full = engine(index, query, 10)
                short = engine(index, query, 4)
                assert [(r.unit_id, r.rank) for r in short] == [
                    (r.unit_id, r.rank) for r in full[:4]
                ]

    def test_weight_scaling_preserves_order(self):
        rng = random.Random(13)
        store = random_corpus(rng)
        index = build_index(store)
        for _ in range(20):
            terms = rng.sample([f"w{i}" for i in range(30)], k=3)
            base = content_query(*terms)
            scaled = content_query(*terms, weight=3.5)
            for engine in (search_vsm, search_qlm):
                assert [r.unit_id for r in engine(index, base, 10)] == [
                    r.unit_id for r in engine(index, scaled, 10)
                ]

    def test_scores_invariant_under_insertion_order(self):
        rng = random.Random(17)
        vocab = [f"w{i}" for i in range(20)]
        rows = [(f"Doc {i}", (), " ".join(rng.choices(vocab, k=15))) for i in range(10)]
        store_a = store_from(rows)
        store_b = store_from(list(reversed(rows)))
        index_a = build_index(store_a)
        index_b = build_index(store_b)
        query = content_query("w1", "w2", "w3")
        for engine in (search_vsm, search_qlm):
            by_title_a = {r.title: r.native_score for r in engine(index_a, query, 10)}
            by_title_b = {r.title: r.native_score for r in engine(index_b, query, 10)}
            assert set(by_title_a) == set(by_title_b)
            for title, score in by_title_a.items():
                assert score == pytest.approx(by_title_b[title], rel=1e-12)

    def test_passage_clauses_may_not_mix_with_doc_clauses(self):
        store = store_from([("A", (), "alpha beta")])
        index = build_index(store)
        mixed = Query((QueryClause(FIELD_PASSAGE, "alpha", 1.0),
                       QueryClause(FIELD_CONTENT, "beta", 1.0)))
        with pytest.raises(ValueError):
            search_vsm(index, mixed, 5)
