import json
from pathlib import Path

import pytest

from titleqa.cli import run_cli

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="module")
def tiny_index_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("index")
    code = run_cli(["index", str(DATA / "tiny_corpus.jsonl"), "--out", str(out)])
    assert code == 0
    return out


class TestIndexCommand:
    def test_writes_artifacts(self, tiny_index_dir):
        assert (tiny_index_dir / "corpus.json").exists()
        assert (tiny_index_dir / "index.json").exists()

    def test_missing_corpus_is_data_error(self, tmp_path, capsys):
        code = run_cli(["index", str(tmp_path / "nope.jsonl"),
                        "--out", str(tmp_path / "out")])
        assert code == 2
        assert "nope.jsonl" in capsys.readouterr().err

    def test_pageviews_flag(self, tmp_path):
        views = tmp_path / "views.tsv"
        views.write_text("Amber Lantern\t100\n", encoding="utf-8")
        out = tmp_path / "idx"
        code = run_cli(["index", str(DATA / "tiny_corpus.jsonl"),
                        "--pageviews", str(views), "--out", str(out)])
        assert code == 0
        payload = json.loads((out / "corpus.json").read_text(encoding="utf-8"))
        by_title = {d["title"]: d["popularity"] for d in payload["documents"]}
        assert by_title["Amber Lantern"] > 0
        assert by_title["Cedar Mill"] == 0

    def test_no_synonyms_flag(self, tmp_path, capsys):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text(
            '{"title": "Museum of Modern Art", "text": "galleries", "redirect": null}\n'
            '{"title": "MOMA", "text": "", "redirect": "Museum of Modern Art"}\n',
            encoding="utf-8",
        )
        out = tmp_path / "idx"
        code = run_cli(["index", str(corpus), "--out", str(out), "--no-synonyms"])
        assert code == 0
        index_text = (out / "index.json").read_text(encoding="utf-8")
        assert '"moma"' not in index_text


class TestAskCommand:
    def test_untrained_answers_are_uniform_and_alphabetical(self, tiny_index_dir,
                                                            capsys):
        code = run_cli(["ask", "Which atlas charts the cedar mill and the dune pier?",
                        "--index", str(tiny_index_dir)])
        assert code == 0
        out = capsys.readouterr().out
        lines = [l for l in out.splitlines() if l and l[0].isdigit()]
        assert len(lines) == 5
        assert all("0.5000" in line for line in lines)
        answers = [line.split("0.5000")[1].strip() for line in lines]
        assert answers == sorted(answers)
        assert "evidence:" in out

    def test_missing_index_names_path(self, tmp_path, capsys):
        code = run_cli(["ask", "anything", "--index", str(tmp_path / "absent")])
        assert code == 2
        assert "absent" in capsys.readouterr().err

    def test_degenerate_question_is_data_error(self, tiny_index_dir, capsys):
        code = run_cli(["ask", "to be or not to be", "--index", str(tiny_index_dir)])
        assert code == 2
        assert "no query terms" in capsys.readouterr().err


class TestTrainEvalCommands:
    def test_train_then_eval(self, tiny_index_dir, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        code = run_cli(["train", str(DATA / "tiny_questions.jsonl"),
                        "--index", str(tiny_index_dir), "--out", str(model_path)])
        assert code == 0
        assert model_path.exists()
        payload = json.loads(model_path.read_text(encoding="utf-8"))
        assert payload["learner"] == "logistic"

        report_path = tmp_path / "report.json"
        code = run_cli(["eval", str(DATA / "tiny_questions.jsonl"),
                        "--index", str(tiny_index_dir),
                        "--model", str(model_path),
                        "--report-out", str(report_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "Recall of Rank 1" in out
        assert "# resolved configuration" in out
        report = json.loads(report_path.read_text(encoding="utf-8"))
        assert report["total_questions"] == 3

    def test_eval_untrained_matches_reference(self, tiny_index_dir, capsys):
        code = run_cli(["eval", str(DATA / "tiny_questions.jsonl"),
                        "--index", str(tiny_index_dir)])
        assert code == 0
        out = capsys.readouterr().out
        assert "1 (33.33%)" in out
        assert "2 (66.67%)" in out
        assert "0.7500" in out

    def test_eval_writes_figures_and_features(self, tiny_index_dir, tmp_path, capsys):
        figures = tmp_path / "figs"
        features = tmp_path / "features.tsv"
        code = run_cli(["eval", str(DATA / "tiny_questions.jsonl"),
                        "--index", str(tiny_index_dir),
                        "--figures-dir", str(figures),
                        "--dump-features", str(features)])
        assert code == 0
        assert (figures / "metrics.png").stat().st_size > 0
        assert (figures / "first_correct_rank.png").stat().st_size > 0
        header = features.read_text(encoding="utf-8").splitlines()[0]
        assert header.startswith("question_index\tanswer\tlabel\t")

    def test_eval_stdout_deterministic_outside_runtime(self, tiny_index_dir, capsys):
        argv = ["eval", str(DATA / "tiny_questions.jsonl"),
                "--index", str(tiny_index_dir), "--workers", "1"]
        assert run_cli(argv) == 0
        first = capsys.readouterr().out
        assert run_cli(argv) == 0
        second = capsys.readouterr().out

        def stable(text):
            return [l for l in text.splitlines() if not l.startswith("Total Runtime")]

        assert stable(first) == stable(second)

    def test_config_file_and_flag_precedence(self, tiny_index_dir, tmp_path, capsys):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("mu = 500\ntitle_weight = 0.4\n", encoding="utf-8")
        code = run_cli(["eval", str(DATA / "tiny_questions.jsonl"),
                        "--index", str(tiny_index_dir),
                        "--config", str(cfg_file), "--mu", "900"])
        assert code == 0
        out = capsys.readouterr().out
        assert "# mu = 900.0" in out  # flag beats file
        assert "# title_weight = 0.4" in out  # file beats default


class TestGlobalFlags:
    def test_show_analysis(self, capsys):
        code = run_cli(["--show-analysis", "The cats are running"])
        assert code == 0
        assert capsys.readouterr().out.splitlines() == ["cat", "run"]

    def test_show_stopwords(self, capsys):
        code = run_cli(["--show-stopwords"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 33
        assert "the" in lines

    def test_unknown_subcommand_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            run_cli(["frobnicate"])
        assert excinfo.value.code == 1

    def test_no_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            run_cli([])
        assert excinfo.value.code == 1

    def test_missing_required_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            run_cli(["index", "corpus.jsonl"])  # --out missing
        assert excinfo.value.code == 1
