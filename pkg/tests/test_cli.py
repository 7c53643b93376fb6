import json

import numpy as np
import pytest
from click.testing import CliRunner

from bosonmatch.cli import main
from bosonmatch.formats import dump_graph, dump_matrix
from bosonmatch.graphs import Graph, complete_graph, empty_graph


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def k2_path(tmp_path):
    path = tmp_path / "k2.json"
    dump_graph(Graph(2, {(0, 1): 1.0}), path)
    return str(path)


@pytest.fixture
def ones22_path(tmp_path):
    path = tmp_path / "a.csv"
    dump_matrix(np.ones((2, 2)), path)
    return str(path)


class TestExactCommands:
    def test_exact_gbs_table(self, runner, k2_path):
        result = runner.invoke(main, ["exact", "gbs", "--graph", k2_path, "--c", "1"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["outcomes"] == [{"key": [], "p": 0.5}, {"key": [0, 1], "p": 0.5}]

    def test_exact_bs_table(self, runner, ones22_path):
        result = runner.invoke(main, ["exact", "bs", "--matrix", ones22_path])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert {tuple(o["key"]): o["p"] for o in payload["outcomes"]} == {
            (0, 2): 0.25, (1, 1): 0.5, (2, 0): 0.25,
        }

    def test_exact_gadget(self, runner, ones22_path):
        result = runner.invoke(main, ["exact", "gadget", "--matrix", ones22_path, "--k", "2"])
        assert result.exit_code == 0

    def test_exact_matchings(self, runner, k2_path):
        result = runner.invoke(main, ["exact", "matchings", "--graph", k2_path])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["sizes"] == {"0": 1, "1": 1}

    def test_size_limit_exit_code_two(self, runner, tmp_path):
        path = tmp_path / "big.json"
        dump_graph(empty_graph(13), path)
        result = runner.invoke(main, ["exact", "gbs", "--graph", str(path), "--c", "1"])
        assert result.exit_code == 2


class TestSampleCommands:
    def test_rejects_zero_samples(self, runner, k2_path, tmp_path):
        result = runner.invoke(
            main,
            ["sample-gbs", "--graph", k2_path, "--c", "1", "--samples", "0",
             "--out", str(tmp_path / "x.jsonl")],
        )
        assert result.exit_code == 1
        assert "samples must be >= 1" in result.output

    def test_gbs_run_writes_samples_and_manifest(self, runner, k2_path, tmp_path):
        out = tmp_path / "s.jsonl"
        result = runner.invoke(
            main,
            ["sample-gbs", "--graph", k2_path, "--c", "1", "--samples", "100",
             "--seed", "9", "--desk-steps", "--out", str(out),
             "--summary", str(tmp_path / "sum.json")],
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 100
        assert all(json.loads(ln) in ([], [0, 1]) for ln in lines)
        manifest = json.loads((tmp_path / "s.jsonl.manifest.json").read_text())
        assert manifest["command"] == "sample-gbs" and manifest["seed"] == 9
        summary = json.loads((tmp_path / "sum.json").read_text())
        assert abs(sum(o["p"] for o in summary["outcomes"]) - 1) < 1e-9

    def test_byte_identical_reruns(self, runner, k2_path, tmp_path):
        args = ["sample-gbs", "--graph", k2_path, "--c", "1", "--samples", "200",
                "--seed", "4", "--desk-steps"]
        out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert runner.invoke(main, args + ["--out", str(out1)]).exit_code == 0
        assert runner.invoke(main, args + ["--out", str(out2)]).exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_bs_run(self, runner, ones22_path, tmp_path):
        out = tmp_path / "z.jsonl"
        result = runner.invoke(
            main,
            ["sample-bs", "--matrix", ones22_path, "--epsilon", "0.2", "--samples", "50",
             "--seed", "3", "--k", "2", "--max-steps", "1000", "--retry-budget", "4096",
             "--retry-steps", "300", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 50
        assert all(sum(json.loads(ln)) == 2 for ln in lines)

    def test_bs_zero_column_exit_one(self, runner, tmp_path):
        path = tmp_path / "bad.csv"
        dump_matrix(np.array([[1.0, 0.0], [1.0, 0.0]]), path)
        result = runner.invoke(
            main,
            ["sample-bs", "--matrix", str(path), "--samples", "5",
             "--out", str(tmp_path / "z.jsonl")],
        )
        assert result.exit_code == 1


class TestBiasReportCommand:
    def test_csv_output(self, runner, ones22_path):
        result = runner.invoke(main, ["bias-report", "--matrix", ones22_path, "--k", "32"])
        assert result.exit_code == 0
        assert result.output.splitlines()[0] == "pattern,factor"
        assert '"2 0",0.96875' in result.output


class TestVerifyCommand:
    def test_small_corpus_exact_checks(self, runner, tmp_path):
        out = tmp_path / "reports.jsonl"
        result = runner.invoke(
            main, ["verify", "lemma2", "--corpus-max-n", "4", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        reports = [json.loads(ln) for ln in out.read_text().splitlines()]
        assert reports and all(r["passed"] for r in reports)
        assert {r["check_name"] for r in reports} == {"lemma2"}

    def test_gadget_bias_checks(self, runner):
        result = runner.invoke(main, ["verify", "gadget-bias"])
        assert result.exit_code == 0, result.output


class TestVersion:
    def test_version_flag(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "bosonmatch 0.1.0" in result.output
