"""Tests for the command-line interface."""

import json

import pytest

from heardof.cli import build_parser, main, parse_overrides
from heardof.config import DEFAULT_BUDGET
from heardof.errors import ParameterError
from heardof.model import Collection
from heardof.strategies import f_n_minus_F


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBuild:
    def test_json(self, capsys):
        code, out, _ = run(capsys, "build", "--n", "2", "--horizon", "1", "--expr", "crash(1)")
        assert code == 0
        data = json.loads(out)
        assert data["expr"] == "crash(1)"
        assert len(data["collections"]) == 7

    def test_text_with_limit(self, capsys):
        code, out, _ = run(
            capsys, "build", "--n", "2", "--horizon", "1", "--expr", "crash(1)",
            "--format", "text", "--limit", "1",
        )
        assert code == 0
        assert "members=1" in out

    def test_preset(self, capsys):
        code, out, _ = run(capsys, "build", "--n", "2", "--horizon", "1", "--preset", "crashF")
        assert code == 0
        assert json.loads(out)["expr"] == "crash(1)"

    def test_expression_is_required(self, capsys):
        code, _, err = run(capsys, "build")
        assert code == 2
        assert "--expr or --preset" in err

    def test_syntax_error_position(self, capsys):
        code, _, err = run(capsys, "build", "--expr", "crash(")
        assert code == 2
        assert "position 6" in err

    def test_png_only_for_traces(self, capsys):
        code, _, err = run(capsys, "build", "--expr", "total", "--format", "png")
        assert code == 2
        assert "png" in err

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "total.json"
        code, out, _ = run(capsys, "build", "--n", "2", "--horizon", "1", "--expr", "total", "--out", str(target))
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["collections"][0]["sets"] == [[[0, 1], [0, 1]]]


class TestMinimal:
    def test_oblivious(self, capsys):
        code, out, _ = run(capsys, "minimal", "--expr", "crash(1)", "--family", "obliv")
        assert code == 0
        assert json.loads(out)["nexts"] == [[0, 1], [0, 2], [1, 2], [0, 1, 2]]

    def test_conservative_text(self, capsys):
        code, out, _ = run(
            capsys, "minimal", "--n", "2", "--horizon", "2", "--expr", "total",
            "--family", "cons", "--format", "text",
        )
        assert code == 0
        assert "accepted prefixes (2):" in out


class TestHeardOf:
    def test_product_shortcut(self, capsys):
        code, out, _ = run(capsys, "ho", "--expr", "crash(1)", "--strategy", "fnf")
        assert code == 0
        data = json.loads(out)
        assert data["size"] == 4096
        assert data["generator"]["kind"] == "HOProd"
        assert "collections" not in data

    def test_search_needs_consent(self, capsys):
        code, _, err = run(capsys, "ho", "--n", "2", "--horizon", "1", "--expr", "loss(1)", "--strategy", "floss")
        assert code == 2
        assert "--enumerate" in err

    def test_enumerated(self, capsys):
        code, out, _ = run(
            capsys, "ho", "--n", "2", "--horizon", "1", "--expr", "loss(1)",
            "--strategy", "floss", "--enumerate", "--members",
        )
        assert code == 0
        data = json.loads(out)
        assert data["size"] == 5
        assert data["deadlocks"] == []
        assert data["partial"] is False
        assert len(data["collections"]) == 5

    def test_budget_default_is_reported(self, capsys):
        code, out, _ = run(
            capsys, "ho", "--n", "2", "--horizon", "1", "--expr", "loss(1)",
            "--strategy", "floss", "--enumerate",
        )
        assert code == 0
        assert json.loads(out)["budget"] == DEFAULT_BUDGET
        args = build_parser().parse_args(["ho", "--expr", "total"])
        assert args.budget == DEFAULT_BUDGET

    def test_explicit_budget(self, capsys):
        code, out, _ = run(
            capsys, "ho", "--n", "2", "--horizon", "1", "--expr", "loss(1)",
            "--strategy", "floss", "--enumerate", "--budget", "1",
        )
        assert code == 0
        data = json.loads(out)
        assert data["budget"] == 1
        assert data["partial"] is True

    def test_strategy_file(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps(f_n_minus_F(2, 1).to_json()))
        code, out, _ = run(capsys, "ho", "--n", "2", "--horizon", "1", "--expr", "crash(1)", "--strategy", str(path))
        assert code == 0
        assert json.loads(out)["size"] == 9

    def test_unknown_strategy(self, capsys):
        code, _, err = run(capsys, "ho", "--expr", "total", "--strategy", "psychic")
        assert code == 2
        assert "unknown strategy" in err


class TestTrace:
    def test_standard_text(self, capsys):
        code, out, _ = run(
            capsys, "trace", "--n", "2", "--horizon", "1", "--expr", "total",
            "--strategy", "fnf", "--faults", "0", "--format", "text",
        )
        assert code == 0
        assert out.splitlines() == [
            "D 1 p1 p1",
            "D 1 p1 p2",
            "D 1 p2 p1",
            "D 1 p2 p2",
            "N p1",
            "N p2",
        ]

    def test_canonical_from_collection_file(self, capsys, tmp_path):
        path = tmp_path / "ho.json"
        path.write_text(json.dumps(Collection(2, 1, ((1, 3),)).to_json()))
        code, out, _ = run(capsys, "trace", "--kind", "canonical", "--collection", str(path), "--format", "text")
        assert code == 0
        assert out.splitlines()[-1] == "D 1 p2 p1"

    def test_png_needs_a_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "trace", "--n", "2", "--horizon", "1", "--expr", "total", "--format", "png")
        assert code == 2
        target = tmp_path / "trace.png"
        code, _, _ = run(
            capsys, "trace", "--n", "2", "--horizon", "1", "--expr", "total",
            "--format", "png", "--out", str(target),
        )
        assert code == 0
        assert target.read_bytes().startswith(b"\x89PNG")

    def test_shifted_out_of_domain(self, capsys, tmp_path):
        path = tmp_path / "ho.json"
        path.write_text(json.dumps(Collection(3, 1, ((3, 3, 7),)).to_json()))
        code, _, err = run(capsys, "trace", "--kind", "shifted", "--collection", str(path))
        assert code == 2
        assert "at most one" in err


class TestCheck:
    def test_common_round(self, capsys):
        code, out, _ = run(capsys, "check", "--property", "common-round", "--expr", "crash(1)")
        assert code == 0
        assert json.loads(out)["verdict"] == "holds-at-horizon"

    def test_common_round_gap_as_text(self, capsys):
        code, out, _ = run(capsys, "check", "--property", "common-round", "--expr", "loss(1)", "--format", "text")
        assert code == 0
        assert out.startswith("common-round: fails")

    def test_invalid_strategy(self, capsys):
        code, out, _ = run(
            capsys, "check", "--property", "validity", "--n", "2", "--horizon", "1",
            "--expr", "crash(1)", "--strategy", "fnf", "--faults", "0",
        )
        assert code == 0
        report = json.loads(out)
        assert report["verdict"] == "fails"
        assert report["witness"] == {"missing": ["{p1}", "{p2}"]}

    def test_domination_evidence(self, capsys):
        code, out, _ = run(capsys, "check", "--property", "domination", "--n", "2", "--horizon", "1", "--expr", "crash(1)")
        assert code == 0
        assert json.loads(out)["witness"]["certificate"] == "common-round"

    def test_domination_without_a_condition(self, capsys):
        code, out, _ = run(
            capsys, "check", "--property", "domination", "--n", "2", "--horizon", "1",
            "--expr", "loss(1)", "--format", "text",
        )
        assert code == 0
        assert out.startswith("domination-evidence: no-condition [certificate]")
        assert "fails" not in out
        assert "no sufficient condition applies; nothing is refuted" in out


class TestSuite:
    def test_passing_run(self, capsys):
        code, out, _ = run(
            capsys, "suite", "--n", "2", "--horizon", "1",
            "--checks", "fnf-characterization,floss-validity",
        )
        assert code == 0
        data = json.loads(out)
        assert [r["theorem"] for r in data["reports"]] == ["floss-validity", "fnf-characterization"]
        assert data["summary"]["fails"] == 0

    def test_injected_fault_fails(self, capsys):
        code, out, _ = run(
            capsys, "suite", "--n", "2", "--horizon", "1", "--checks", "floss-validity",
            "--override", "loss=crash(1)",
        )
        assert code == 1
        assert json.loads(out)["summary"]["fails"] == 1

    def test_unknown_role(self, capsys):
        code, _, err = run(capsys, "suite", "--n", "2", "--horizon", "1", "--override", "byzantine=total")
        assert code == 2
        assert "invalid suite configuration" in err

    def test_unknown_check(self, capsys):
        code, _, _ = run(capsys, "suite", "--checks", "no-such-check")
        assert code == 2

    def test_sweep(self, capsys):
        code, out, _ = run(
            capsys, "suite", "--n", "2", "--checks", "fnf-characterization", "--sweep", "1,2",
        )
        assert code == 0
        data = json.loads(out)
        assert len(data["runs"]) == 2
        assert data["differences"] == []


def test_parse_overrides():
    assert parse_overrides(["loss = loss(2)"]) == {"loss": "loss(2)"}
    with pytest.raises(ParameterError):
        parse_overrides(["loss"])
