"""Command-line entry point.

Subcommands: ``index`` (ingest a corpus dump and build the on-disk
index), ``ask`` (answer one question), ``train`` (fit a confidence model
on labeled questions), ``eval`` (score a question set and print the
metrics table). Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .analysis import STOPWORDS, analyze
from .config import RunConfig, load_config_file
from .corpus import (
    CorpusFormatError,
    CorpusStore,
    attach_popularity,
    ingest_corpus,
    load_pageviews,
)
from .evaluation import collect_features, dump_features, run_eval
from .pipeline import DegenerateQueryError, Question, answer_question, read_questions
from .ranker import TrainingConfig, load_model, save_model, train_model
from .search import ENGINE_WEBMOCK, InvertedIndex, WebMockFixture, build_index

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

CORPUS_FILE = "corpus.json"
INDEX_FILE = "index.json"


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this CLI reserves 2 for data
    errors, so remap."""

    def error(self, message: str) -> None:  # noqa: D401
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="titleqa",
                     description="Question answering over a locally indexed corpus.")
    parser.add_argument("--version", action="version", version=f"titleqa {__version__}")
    parser.add_argument("--show-analysis", metavar="TEXT",
                        help="print the analyzed token stream of TEXT and exit")
    parser.add_argument("--show-stopwords", action="store_true",
                        help="print the embedded stopword list and exit")
    sub = parser.add_subparsers(dest="command")

    p_index = sub.add_parser("index", help="ingest a corpus dump and build the index")
    p_index.add_argument("corpus", help="JSON Lines corpus dump")
    p_index.add_argument("--pageviews", help="title<TAB>count TSV of page views")
    p_index.add_argument("--out", required=True, help="output directory for the index")
    p_index.add_argument("--no-synonyms", action="store_true",
                         help="do not fold redirect synonyms into the title field")
    _config_flags(p_index)

    p_ask = sub.add_parser("ask", help="answer a single question")
    p_ask.add_argument("question", help="question text")
    p_ask.add_argument("--index", required=True, help="index directory")
    p_ask.add_argument("--model", help="trained model file")
    p_ask.add_argument("--top", type=int, default=5, help="answers to print (default 5)")
    _config_flags(p_ask)

    p_train = sub.add_parser("train", help="train a confidence model")
    p_train.add_argument("questions", help="JSON Lines question file with gold answers")
    p_train.add_argument("--index", required=True, help="index directory")
    p_train.add_argument("--out", required=True, help="model output path")
    p_train.add_argument("--dump-features", metavar="PATH",
                         help="write the per-candidate feature matrix as TSV")
    _config_flags(p_train)

    p_eval = sub.add_parser("eval", help="evaluate a question set")
    p_eval.add_argument("questions", help="JSON Lines question file")
    p_eval.add_argument("--index", required=True, help="index directory")
    p_eval.add_argument("--model", help="trained model file (omit for uniform 0.5)")
    p_eval.add_argument("--report-out", metavar="PATH", help="also write the report as JSON")
    p_eval.add_argument("--figures-dir", metavar="DIR",
                        help="render report figures (PNG) into this directory")
    p_eval.add_argument("--dump-features", metavar="PATH",
                        help="write the per-candidate feature matrix as TSV")
    p_eval.add_argument("--workers", type=int,
                        help="parallel question workers (default 1)")
    _config_flags(p_eval)
    return parser


def _config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--webmock", help="web-engine fixture (JSON Lines); enables webmock")
    parser.add_argument("--engines", help="comma-separated engine list (vsm,qlm,webmock)")
    parser.add_argument("--mu", type=float, help="Dirichlet smoothing parameter")
    parser.add_argument("--title-weight", type=float, help="title field query weight")
    parser.add_argument("--content-weight", type=float, help="content field query weight")
    parser.add_argument("--total-cap", type=int, help="total fused result cap")
    parser.add_argument("--learner", help="confidence learner name (default logistic)")


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = load_config_file(args.config, cfg)
    overrides = {
        "webmock_path": getattr(args, "webmock", None),
        "mu": getattr(args, "mu", None),
        "title_weight": getattr(args, "title_weight", None),
        "content_weight": getattr(args, "content_weight", None),
        "total_cap": getattr(args, "total_cap", None),
        "learner": getattr(args, "learner", None),
        "workers": getattr(args, "workers", None),
    }
    explicit_engines = bool(getattr(args, "engines", None))
    if explicit_engines:
        overrides["engines"] = tuple(
            e.strip() for e in args.engines.split(",") if e.strip()
        )
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    # a fixture path implies the mock engine unless the engine list was pinned
    if cfg.webmock_path and not explicit_engines and ENGINE_WEBMOCK not in cfg.engines:
        cfg.engines = (*cfg.engines, ENGINE_WEBMOCK)
    cfg.validate()
    return cfg


def _echo_config(cfg: RunConfig) -> None:
    print("# resolved configuration")
    for key, value in sorted(cfg.resolved().items()):
        print(f"# {key} = {value}")


def _load_index(index_dir: str) -> tuple[CorpusStore, InvertedIndex]:
    root = Path(index_dir)
    corpus_path = root / CORPUS_FILE
    index_path = root / INDEX_FILE
    for path in (corpus_path, index_path):
        if not path.exists():
            raise FileNotFoundError(f"missing index artifact: {path}")
    return CorpusStore.load(corpus_path), InvertedIndex.load(index_path)


def _load_webmock(cfg: RunConfig) -> WebMockFixture | None:
    if ENGINE_WEBMOCK not in cfg.engines:
        return None
    return WebMockFixture.from_file(cfg.webmock_path)


def _cmd_index(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    if args.no_synonyms:
        cfg.include_synonyms = False
    _echo_config(cfg)
    store = ingest_corpus(args.corpus)
    if args.pageviews:
        attach_popularity(store, load_pageviews(args.pageviews))
    index = build_index(store, include_synonyms=cfg.include_synonyms,
                        window=cfg.window, stride=cfg.stride)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    store.save(out / CORPUS_FILE)
    index.save(out / INDEX_FILE)
    stats = store.stats
    print(f"indexed {stats.documents} documents "
          f"({stats.total_tokens} body tokens, "
          f"{len(store.synonym_map)} synonyms, "
          f"{len(index.passages)} passage windows) -> {out}")
    return EXIT_OK


def _cmd_ask(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg)
    _store, index = _load_index(args.index)
    model = load_model(args.model) if args.model else None
    webmock = _load_webmock(cfg)
    question = Question.make(args.question)
    ranked = answer_question(question, index, model, cfg, webmock)
    if not ranked:
        print("no candidate answers")
        return EXIT_OK
    print(f"{'rank':<6}{'confidence':<12}answer")
    for cand in ranked[: args.top]:
        print(f"{cand.final_rank:<6}{cand.confidence:<12.4f}{cand.answer_text}")
        snippet = cand.evidence[0].text.replace("\n", " ")
        if len(snippet) > 100:
            snippet = snippet[:100] + "..."
        print(f"{'':<18}evidence: {snippet}")
    return EXIT_OK


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg)
    _store, index = _load_index(args.index)
    webmock = _load_webmock(cfg)
    questions = read_questions(args.questions)
    labeled = [q for q in questions if q.gold_answer]
    if not labeled:
        raise CorpusFormatError(f"{args.questions}: no questions carry a gold answer")
    matrix, meta = collect_features(labeled, index, cfg, webmock)
    if args.dump_features:
        dump_features(matrix, meta, args.dump_features)
        print(f"wrote feature matrix to {args.dump_features}")
    training = TrainingConfig(learning_rate=cfg.learning_rate, epochs=cfg.epochs,
                              l2=cfg.l2, seed=cfg.seed)
    model = train_model(cfg.learner, matrix, training)
    save_model(model, args.out)
    print(f"trained {cfg.learner} on {matrix.rows.shape[0]} candidates "
          f"({int(matrix.labels.sum())} positive) from {len(labeled)} questions "
          f"-> {args.out}")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg)
    _store, index = _load_index(args.index)
    model = load_model(args.model) if args.model else None
    webmock = _load_webmock(cfg)
    questions = read_questions(args.questions)
    report = run_eval(questions, index, model, cfg, webmock)
    print(report.render_text())
    if args.report_out:
        report.save(args.report_out)
        print(f"wrote report to {args.report_out}")
    if args.dump_features:
        labeled = [q for q in questions if q.gold_answer]
        matrix, meta = collect_features(labeled, index, cfg, webmock)
        dump_features(matrix, meta, args.dump_features)
        print(f"wrote feature matrix to {args.dump_features}")
    if args.figures_dir:
        from .plots import render_figures

        for path in render_figures(report, args.figures_dir):
            print(f"wrote figure {path}")
    return EXIT_OK


_COMMANDS = {
    "index": _cmd_index,
    "ask": _cmd_ask,
    "train": _cmd_train,
    "eval": _cmd_eval,
}


def run_cli(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.show_analysis is not None:
        for token in analyze(args.show_analysis):
            print(token)
        return EXIT_OK
    if args.show_stopwords:
        for word in STOPWORDS:
            print(word)
        return EXIT_OK
    if args.command is None:
        parser.error("a subcommand is required (index, ask, train, eval)")
    try:
        return _COMMANDS[args.command](args)
    except (FileNotFoundError, CorpusFormatError, DegenerateQueryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    raise SystemExit(run_cli())


if __name__ == "__main__":
    main()
