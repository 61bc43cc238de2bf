#!/usr/bin/env python3
"""Generate the bundled corpora, question sets, and engine fixtures.

Everything is derived from a fixed seed so regeneration is
reproducible. After writing the files the script replays the
properties the acceptance suite relies on (engine-union recall,
synonym recall, trained-vs-untrained MRR) and fails loudly if the
generated data does not exhibit them.
"""

from __future__ import annotations

import json
import random
import sys
from dataclasses import replace
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from titleqa.analysis import analyze  # noqa: E402
from titleqa.config import RunConfig  # noqa: E402
from titleqa.corpus import attach_popularity, ingest_corpus, load_pageviews  # noqa: E402
from titleqa.evaluation import collect_features, run_eval  # noqa: E402
from titleqa.pipeline import read_questions  # noqa: E402
from titleqa.ranker import TrainingConfig, train_logistic  # noqa: E402
from titleqa.search import WebMockFixture, build_index  # noqa: E402

SEED = 20260810
DATA_DIR = Path(__file__).resolve().parent.parent / "data"

FIRST = (
    "Amberly Basalt Cedarcrest Dunmore Eldwick Fernsby Garnet Heronby "
    "Ironwood Juniper Kestrel Larkmoor Marigold Nettlebed Osprey Pinewell "
    "Quartzen Rowanby Sorrel Tamarisk Umberly Vireo Willowmere Yarrow "
    "Zephyrine Aldergate Briarholm Cobaltine Damson Elmsworth Foxglove "
    "Gullwing Hawthorn Islay Jackdaw Kelpie Lindenrow Mistral Nightjar "
    "Oakhurst Pelican Quince Redpoll Saffron Teasel Uplandia Verbena "
    "Wrenfield Yewbarrow Zinnia Ashcombe Bellwether Cindervale Dovetail "
    "Eiderdown Flintlock Gorsewood Hollyoake Ivorine Jessamine"
).split()

SECOND = (
    "Archive Belfry Boathouse Causeway Cloister Cottage Foundry Gallery "
    "Granary Jetty Kiln Lagoon Lighthouse Meadow Mill Observatory Orchard "
    "Pavilion Pier Quarry Reservoir Rotunda Seminary Station Terrace Tower "
    "Vault Viaduct Warehouse Windmill"
).split()

DISTINCT = (
    "anvil argonite ashlar awlwork azurite ballast barite barleycorn "
    "beeswax bellows bitumen bobbin borax brinepot bronzeware buckram "
    "burlap calico caliper camphor canvas caraway cardamom carob cassia "
    "chalkstone charcoal chicory chisel cinnabar clovebud cobnut cochineal "
    "coppering crucible cumin damask dillseed dowel dulse feldspar ferrule "
    "filigree flax fresco galena gimlet gingham goosedown graphite gypsum "
    "hemp henna hessian hickory hode indigo isinglass jacquard jarrah "
    "jetsam kaolin kapok lacquer lanolin lapis linseed lodestone loam "
    "madder mahogany malachite marlin mastic meerschaum mica millet "
    "mohair mortise muslin myrrh nacre nankeen neroli nutmeg obsidian "
    "ochre onyx orpiment osier paprika parchment peat pewter pimento "
    "pitchblende plumbago porphyry pumice quicklime quillwork ramie "
    "rattan rennet rosin rushlight saltpetre sandarac sapwood sassafras "
    "scrimshaw selenite senna sepia shellac sisal slateboard sorghum "
    "spelter spikenard stibnite suet taffeta talcum tallow tansy tapioca "
    "tarragon teakwood terracotta thatching ticking tortoiseshell tripoli "
    "tufa tungsten turmeric tussore umberdye valerian vellum verdigris "
    "vermilion wadding walnutwood whalebone whetstone wicker woad "
    "wolfram wormwood zedoary zircon alabaster ambergris aniline "
    "antimony aquafortis arrowroot balsa basswood bayberry bergamot "
    "bistre bladderwrack boxwood brazilwood briarroot cambric carnelian "
    "cedarwood celadon chamomile chert chrysolite citronella copal "
    "cowrie cubeb damiana dragonwort elderpith emery fennelseed "
    "fulminate gallnut gambier garnierite glasswort greenheart guaiacum "
    "gumarabic hartshorn heliotrope hellebore hornbeam hyssop ironbark "
    "jadeite jequirity kauri kermes kieselguhr lancewood lignite "
    "litharge logwood lovage lycopod manganese mangrove manna massicot "
    "mispickel mugwort mullein natron nephrite nitre oakum oilcloth "
    "oleander orchil orris panicgrass pennyroyal peridot petuntse "
    "pipeclay pitchpine pokeweed potash pyrites quassia quebracho "
    "realgar rhodium rockrose rosewood rottenstone rue saffrongrass "
    "sagewort saltbush samphire santal sardonyx sarsaparilla "
    "smaltite snakeroot soapstone spurge stavesacre storax sumac "
    "tamarind touchwood tragacanth turpeth vetiver vitriol "
    "whitethorn wintergreen witchhazel yarrowroot zaffre"
).split()

COMMON = (
    "harvest market ferry lantern bell stone water garden wall roof door "
    "road bridge river cliff field winter summer spring autumn festival "
    "parade chorus supper twilight morning evening tide moon rain frost "
    "wind fog smoke ash timber rope sail wagon wheel forge loom cellar "
    "attic stair court yard gatehouse lane square green common dock "
    "slip berth net catch flock herd orchardists masons weavers bakers "
    "coopers smiths pilots wardens clerks"
).split()

ALIAS_FIRST = (
    "Saltgate Ninewells Oldquay Kingsreach Bleakmoor Tolbooth Candlerow "
    "Greyfriars Hobnail Lampwick Mossbank Packhorse"
).split()
ALIAS_SECOND = "Row Gate Steps Cross Walk Reach Wharf Stile".split()


def _check_pools() -> None:
    stems: dict[str, str] = {}
    for pool in (FIRST, SECOND, DISTINCT, COMMON, ALIAS_FIRST, ALIAS_SECOND):
        for word in pool:
            key_terms = analyze(word)
            if len(key_terms) != 1:
                raise SystemExit(f"pool word {word!r} does not analyze to one term")
            key = key_terms[0]
            if key in stems and stems[key] != word:
                raise SystemExit(f"stem collision: {word!r} vs {stems[key]!r} -> {key}")
            stems[key] = word


def _tiny_fixture() -> tuple[list[dict], list[dict]]:
    docs = [
        {"title": "Amber Lantern",
         "text": "The amber lantern glows above the harbor steps at dusk. Its brass "
                 "wick burns citrus oil and the glow guides ferries home.",
         "redirect": None},
        {"title": "Bramble Cottage",
         "text": "Bramble Cottage sits behind a thorn hedge. The keeper trims the "
                 "hedge each spring and mends the cottage door.",
         "redirect": None},
        {"title": "Cedar Mill",
         "text": "The cedar mill grinds barley beside the weir. Millstones hum "
                 "through autumn.",
         "redirect": None},
        {"title": "Dune Harbor",
         "text": "Dune Harbor shelters trawlers from the north gale. Sand drifts "
                 "across its stone pier.",
         "redirect": None},
        {"title": "Elm Orchard",
         "text": "The elm orchard yields tart apples. Pickers climb ladders in the "
                 "late fog.",
         "redirect": None},
        {"title": "Fern Hollow",
         "text": "Fern Hollow hides a cold spring under mossy rocks. Foxes den "
                 "along its banks.",
         "redirect": None},
    ]
    questions = [
        {"question": "Where does the amber lantern glow above the harbor steps?",
         "answer": "Amber Lantern", "category": None},
        {"question": "Who trims the thorn hedge behind the cottage?",
         "answer": "Bramble Cottage", "category": None},
        {"question": "Which atlas charts the cedar mill and the dune pier?",
         "answer": "Gossamer Atlas", "category": None},
    ]
    return docs, questions


def _make_corpus(rng: random.Random, n_docs: int = 200):
    titles: list[str] = []
    seen_sets: set[frozenset] = set()
    while len(titles) < n_docs:
        title = f"{rng.choice(FIRST)} {rng.choice(SECOND)}"
        key = frozenset(analyze(title))
        if key in seen_sets:
            continue
        seen_sets.add(key)
        titles.append(title)

    docs = []
    doc_terms = []
    for title in titles:
        d_terms = rng.sample(DISTINCT, rng.randint(3, 5))
        sentences = [
            f"{title} stands near the {rng.choice(COMMON)} {rng.choice(COMMON)} and "
            f"keeps its {rng.choice(COMMON)} traditions."
        ]
        sentences.append(
            f"Its keepers store {d_terms[0]} and {d_terms[1]} beneath the "
            f"{rng.choice(COMMON)} roof."
        )
        if rng.random() < 0.4:
            sentences.append(f"Barrels of {d_terms[0]} arrive with every {rng.choice(COMMON)}.")
        sentences.append(
            f"Traders bring {d_terms[2]} after the {rng.choice(COMMON)} "
            f"{rng.choice(COMMON)}."
        )
        for extra in d_terms[3:]:
            sentences.append(
                f"A ledger records {extra} beside the {rng.choice(COMMON)}."
            )
        for _ in range(rng.randint(1, 9)):
            sentences.append(
                f"The {rng.choice(COMMON)} {rng.choice(COMMON)} draws visitors "
                f"after the {rng.choice(COMMON)} {rng.choice(COMMON)}."
            )
        docs.append({"title": title, "text": " ".join(sentences), "redirect": None})
        doc_terms.append(d_terms)
    return docs, doc_terms


def _make_questions(rng: random.Random, docs: list[dict], doc_terms: list[list[str]],
                    synonym_docs: list[int], aliases: dict[int, str]) -> list[dict]:
    candidates = list(range(len(docs)))
    rng.shuffle(candidates)
    picked = iter(candidates)
    questions: list[dict] = []

    def next_doc(exclude: set[int]) -> int:
        while True:
            i = next(picked)
            if i not in exclude:
                return i

    used: set[int] = set(synonym_docs)
    for _ in range(20):  # easy: two distinctive terms from the gold document
        i = next_doc(used)
        used.add(i)
        d = doc_terms[i]
        questions.append({
            "question": f"Which landmark keeps {d[0]} and {d[1]} beneath its roof?",
            "answer": docs[i]["title"], "category": None,
        })
    for _ in range(12):  # medium: one distinctive term plus common vocabulary
        i = next_doc(used)
        used.add(i)
        d = doc_terms[i]
        questions.append({
            "question": f"Where do traders bring {d[2]} after the "
                        f"{rng.choice(COMMON)} {rng.choice(COMMON)}?",
            "answer": docs[i]["title"], "category": None,
        })
    for _ in range(6):  # hard: common vocabulary only
        i = next_doc(used)
        used.add(i)
        questions.append({
            "question": f"Which place is proud of its {rng.choice(COMMON)} and "
                        f"its {rng.choice(COMMON)}?",
            "answer": docs[i]["title"], "category": None,
        })
    for _ in range(5):  # fill-in-the-blank over a title pattern
        i = next_doc(used)
        used.add(i)
        first_word, rest = docs[i]["title"].split(" ", 1)
        questions.append({
            "question": f'"___ {rest}"',
            "answer": first_word, "category": None,
        })
    for i in synonym_docs:  # reachable only through the redirect alias
        questions.append({
            "question": f"Locals still say {aliases[i]} when the "
                        f"{rng.choice(COMMON)} passes, but which landmark do they mean?",
            "answer": docs[i]["title"], "category": None,
        })
    rng.shuffle(questions)
    return questions


def _make_redirects(rng: random.Random, docs: list[dict]) -> tuple[list[dict], list[int], dict[int, str]]:
    aliases = {}
    pairs = [(f, s) for f in ALIAS_FIRST for s in ALIAS_SECOND]
    rng.shuffle(pairs)
    synonym_docs = rng.sample(range(len(docs)), 7)
    records = []
    for (first, second), i in zip(pairs, synonym_docs):
        alias = f"{first} {second}"
        aliases[i] = alias
        records.append({"title": alias, "text": "", "redirect": docs[i]["title"]})
    # extra aliases that no question uses, plus one two-hop chain
    extra_docs = rng.sample([i for i in range(len(docs)) if i not in synonym_docs], 10)
    for (first, second), i in zip(pairs[7:], extra_docs):
        alias = f"{first} {second} Side"
        records.append({"title": alias, "text": "", "redirect": docs[i]["title"]})
    chain_target = docs[extra_docs[0]]["title"]
    records.append({"title": "Twicefolded Name", "text": "", "redirect": "Oncefolded Name"})
    records.append({"title": "Oncefolded Name", "text": "", "redirect": chain_target})
    return records, synonym_docs, aliases


def _make_pageviews(rng: random.Random, docs: list[dict]) -> list[str]:
    lines = []
    for doc in docs:
        if rng.random() < 0.75:
            count = int(rng.paretovariate(1.2) * 40)
            lines.append(f"{doc['title']}\t{count}")
            if rng.random() < 0.1:
                lines.append(f"{doc['title']}\t{rng.randint(1, 99)}")
    return lines


def _make_webmock(rng: random.Random, docs: list[dict], questions: list[dict],
                  cfg: RunConfig) -> list[dict]:
    from titleqa.pipeline import Question, build_query

    titles = [d["title"] for d in docs]
    entries = []
    for raw in questions:
        if rng.random() < 0.30:
            continue  # the mock engine has no entry for this query
        question = Question.make(raw["question"], category=raw.get("category"))
        key = list(build_query(question, cfg).terms())
        n_results = rng.randint(12, 40)
        pool = rng.sample(titles, n_results)
        if raw["answer"] in titles and rng.random() < 0.62:
            if raw["answer"] in pool:
                pool.remove(raw["answer"])
            pool.insert(rng.randrange(0, min(9, len(pool) + 1)), raw["answer"])
        results = [
            {"title": t, "text": f"{t} appears in a travel column about "
                                 f"{rng.choice(COMMON)} and {rng.choice(COMMON)}."}
            for t in pool
        ]
        entries.append({"query_terms": key, "results": results})
    return entries


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True) + "\n")


def _verify(data_dir: Path) -> None:
    store = ingest_corpus(data_dir / "mini_corpus.jsonl")
    attach_popularity(store, load_pageviews(data_dir / "mini_pageviews.tsv"))
    index = build_index(store)
    index_nosyn = build_index(store, include_synonyms=False)
    questions = read_questions(data_dir / "mini_questions.jsonl")
    webmock = WebMockFixture.from_file(data_dir / "mini_webmock.jsonl")

    deep = RunConfig(engines=("vsm", "qlm"), cap_vsm=10, cap_qlm=10, total_cap=10_000)
    rec = {}
    for name, engines in (("vsm", ("vsm",)), ("qlm", ("qlm",)), ("union", ("vsm", "qlm"))):
        report = run_eval(questions, index, None, replace(deep, engines=engines))
        rec[name] = report.recall_full
    print(f"engine recall @10: vsm={rec['vsm']:.3f} qlm={rec['qlm']:.3f} "
          f"union={rec['union']:.3f}")
    assert rec["union"] > max(rec["vsm"], rec["qlm"]), "union recall not strictly greater"

    with_syn = run_eval(questions, index, None, deep)
    without_syn = run_eval(questions, index_nosyn, None, deep)
    print(f"synonyms: recall {without_syn.recall_full:.3f} -> {with_syn.recall_full:.3f}, "
          f"mrr {without_syn.mrr:.3f} -> {with_syn.mrr:.3f}")
    assert with_syn.recall_full > without_syn.recall_full, "synonyms did not add recall"

    full = RunConfig(engines=("vsm", "qlm", "webmock"),
                     webmock_path=str(data_dir / "mini_webmock.jsonl"))
    train_qs, eval_qs = questions[:40], questions[40:]
    matrix, _meta = collect_features(train_qs, index, full, webmock)
    model = train_logistic(matrix, TrainingConfig())
    untrained = run_eval(eval_qs, index, None, full, webmock)
    trained = run_eval(eval_qs, index, model, full, webmock)
    print(f"held-out MRR: untrained={untrained.mrr:.4f} trained={trained.mrr:.4f} "
          f"(recall_full={trained.recall_full:.3f})")
    assert untrained.mrr is not None and trained.mrr is not None
    assert trained.mrr > untrained.mrr, "training did not improve held-out MRR"

    overall = run_eval(questions, index, model, full, webmock)
    print("--- full bundled eval ---")
    print(overall.render_text())


def main() -> None:
    _check_pools()
    rng = random.Random(SEED)
    DATA_DIR.mkdir(parents=True, exist_ok=True)

    tiny_docs, tiny_questions = _tiny_fixture()
    _write_jsonl(DATA_DIR / "tiny_corpus.jsonl", tiny_docs)
    _write_jsonl(DATA_DIR / "tiny_questions.jsonl", tiny_questions)

    docs, doc_terms = _make_corpus(rng)
    redirect_records, synonym_docs, aliases = _make_redirects(rng, docs)
    questions = _make_questions(rng, docs, doc_terms, synonym_docs, aliases)
    records = docs + redirect_records
    rng.shuffle(records)
    _write_jsonl(DATA_DIR / "mini_corpus.jsonl", records)
    _write_jsonl(DATA_DIR / "mini_questions.jsonl", questions)
    (DATA_DIR / "mini_pageviews.tsv").write_text(
        "\n".join(_make_pageviews(rng, docs)) + "\n", encoding="utf-8"
    )
    webmock_entries = _make_webmock(rng, docs, questions, RunConfig())
    _write_jsonl(DATA_DIR / "mini_webmock.jsonl", webmock_entries)

    print(f"wrote fixtures to {DATA_DIR}")
    _verify(DATA_DIR)
    print("all fixture properties verified")


if __name__ == "__main__":
    main()
