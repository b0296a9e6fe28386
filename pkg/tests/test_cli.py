"""End-to-end command line tests against the offline mock gateway."""

import json

import pytest
from click.testing import CliRunner

from claimcheck.cli import main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def corpus_file(tmp_path, fixture_jsonl):
    path = tmp_path / "corpus.jsonl"
    path.write_text(fixture_jsonl + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def dataset_file(tmp_path):
    rows = [
        {"id": "e1", "input_text": "does vitamin c cure colds?", "gold_label": "Rumor"},
        {"id": "e2", "input_text": "大蒜能降血压吗", "gold_label": "Not rumor"},
    ]
    path = tmp_path / "eval.jsonl"
    path.write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in rows), encoding="utf-8"
    )
    return str(path)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(
        '[paths]\ndata_dir = "%s"\n' % (tmp_path / "data"), encoding="utf-8"
    )
    return str(path)


class TestTopLevel:
    def test_version(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "claimcheck" in result.output

    def test_help_lists_subcommands(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for name in ("ingest", "detect", "serve", "eval", "sweep-threshold"):
            assert name in result.output

    def test_missing_config_file(self, runner):
        result = runner.invoke(main, ["--config", "/no/such/file.toml", "detect", "x"])
        assert result.exit_code == 2

    def test_broken_config_file(self, runner, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("[gateway\n", encoding="utf-8")
        result = runner.invoke(main, ["--config", str(bad), "detect", "x"])
        assert result.exit_code == 1
        assert "TOML" in result.output + result.stderr


class TestIngest:
    def test_reports_summary(self, runner, corpus_file):
        result = runner.invoke(main, ["ingest", corpus_file])
        assert result.exit_code == 0
        assert "inserted 50, skipped 0 duplicates, rejected 0" in result.output

    def test_rejected_lines_go_to_stderr(self, runner, tmp_path):
        path = tmp_path / "partial.jsonl"
        path.write_text(
            json.dumps(
                {
                    "title": "Fine record",
                    "body": "A body that is long enough to stand alone.",
                    "source_name": "desk",
                }
            )
            + '\n{"title": "no body"}\n',
            encoding="utf-8",
        )
        result = runner.invoke(main, ["ingest", str(path)])
        assert result.exit_code == 0
        assert "inserted 1" in result.output
        assert "rejected 1" in result.output
        assert "line 2" in result.stderr

    def test_persists_when_data_dir_configured(
        self, runner, corpus_file, config_file
    ):
        first = runner.invoke(main, ["--config", config_file, "ingest", corpus_file])
        assert first.exit_code == 0
        assert "inserted 50" in first.output
        again = runner.invoke(main, ["--config", config_file, "ingest", corpus_file])
        assert again.exit_code == 0
        assert "inserted 0, skipped 50" in again.output


class TestDetect:
    def test_plain_output(self, runner):
        result = runner.invoke(main, ["detect", "does garlic cure colds?"])
        assert result.exit_code == 0
        assert "label: Not related to health information" in result.output
        assert "valid: True" in result.output
        assert "used references: False" in result.output
        assert "timings ms:" in result.output

    def test_json_output(self, runner):
        result = runner.invoke(main, ["detect", "--json", "does garlic cure colds?"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert set(payload) == {"verdict", "used_references", "timings_ms", "degraded"}
        assert payload["verdict"]["valid"] is True

    def test_override_flags_applied(self, runner, corpus_file, config_file):
        runner.invoke(main, ["--config", config_file, "ingest", corpus_file])
        result = runner.invoke(
            main,
            [
                "--config",
                config_file,
                "detect",
                "--json",
                "--similarity-threshold",
                "-1.0",
                "--top-k",
                "2",
                "case file 000, vitamin c and colds",
            ],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["used_references"] is True
        assert len(payload["verdict"]["references"]) <= 2

    def test_empty_claim_fails_cleanly(self, runner):
        result = runner.invoke(main, ["detect", "   "])
        assert result.exit_code == 1
        assert "empty" in (result.output + result.stderr).lower()


class TestEval:
    def test_prints_table_and_writes_report(self, runner, dataset_file, tmp_path):
        report_path = tmp_path / "report.json"
        result = runner.invoke(
            main, ["eval", dataset_file, "--report", str(report_path)]
        )
        assert result.exit_code == 0
        assert "Avg Accuracy" in result.output
        payload = json.loads(report_path.read_text(encoding="utf-8"))
        assert payload["n_total"] == 2
        assert len(payload["rows"]) == 2

    def test_judge_flag_adds_identity_line(self, runner, dataset_file):
        result = runner.invoke(main, ["eval", dataset_file, "--judge"])
        assert result.exit_code == 0
        assert "judge: mock" in result.output

    def test_bad_dataset_fails_cleanly(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("not json\n", encoding="utf-8")
        result = runner.invoke(main, ["eval", str(bad)])
        assert result.exit_code == 1
        assert "line 1" in result.output + result.stderr


class TestSweep:
    def test_writes_reports_and_summary(self, runner, dataset_file, tmp_path):
        out_dir = tmp_path / "sweep"
        result = runner.invoke(
            main,
            [
                "sweep-threshold",
                dataset_file,
                "--thresholds",
                "0.3,0.7",
                "--out",
                str(out_dir),
            ],
        )
        assert result.exit_code == 0
        assert "Similarity Threshold" in result.output
        assert (out_dir / "report-0.3.json").is_file()
        assert (out_dir / "report-0.7.json").is_file()
        assert (out_dir / "summary.txt").is_file()


class TestSynthesize:
    def test_default_generator_parses(self, runner, tmp_path):
        seeds = tmp_path / "seeds.txt"
        seeds.write_text("does honey help burns?\n\n", encoding="utf-8")
        result = runner.invoke(main, ["synthesize", str(seeds)])
        assert result.exit_code == 0
        assert "synthesized 1 record(s), skipped 0 seed(s)" in result.output
        record = json.loads(result.output.splitlines()[-1])
        assert record["original_question"] == "does honey help burns?"

    def test_out_file(self, runner, tmp_path):
        seeds = tmp_path / "seeds.txt"
        seeds.write_text("seed one\nseed two\n", encoding="utf-8")
        out_path = tmp_path / "fixtures.jsonl"
        result = runner.invoke(
            main, ["synthesize", str(seeds), "-n", "1", "--out", str(out_path)]
        )
        assert result.exit_code == 0
        lines = out_path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1


class TestReindex:
    def test_empty_corpus(self, runner):
        result = runner.invoke(main, ["reindex"])
        assert result.exit_code == 0
        assert "reindexed 0 chunk embeddings" in result.output

    def test_after_ingest(self, runner, corpus_file, config_file):
        runner.invoke(main, ["--config", config_file, "ingest", corpus_file])
        result = runner.invoke(main, ["--config", config_file, "reindex"])
        assert result.exit_code == 0
        assert "reindexed 50 chunk embeddings" in result.output
