"""Tests for the theorem-check suite on small instances."""

import json

import pytest
from pydantic import ValidationError

from heardof import suite
from heardof.analysis import Verdict
from heardof.model import DeliveredCollection, Ordering
from heardof.predicates import build_crashF, combine_pred, has_common_prefix, has_common_round
from heardof.suite import (
    CHECKS,
    SuiteConfig,
    run_horizon_sweep,
    run_theorem_suite,
)

SMALL_CHECKS = [
    "canonical-execution",
    "conservative-validity-criterion",
    "floss-characterization",
    "floss-validity",
    "fnf-characterization",
    "hoprod-equality",
    "order-independence",
]


def small_config(**kwargs) -> SuiteConfig:
    settings = {"n": 2, "horizon": 1, "samples": 5, "checks": SMALL_CHECKS}
    settings.update(kwargs)
    return SuiteConfig(**settings)


class TestConfig:
    def test_defaults(self):
        config = SuiteConfig()
        assert (config.n, config.horizon, config.faults) == (3, 2, 1)
        assert config.expression("crash") == "crash(1)"
        assert config.expression("loss") == "loss(1)"
        assert config.expression("late_crash") == "crash1@2"

    def test_overrides_replace_roles(self):
        config = SuiteConfig(overrides={"loss": "loss(2)"})
        assert config.expression("loss") == "loss(2)"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 0},
            {"horizon": 0},
            {"faults": -1},
            {"checks": ["no-such-check"]},
            {"overrides": {"byzantine": "total"}},
            {"colour": "red"},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            SuiteConfig(**kwargs)

    def test_params_leave_out_the_ordering(self):
        forward = SuiteConfig(ordering=Ordering.FORWARD)
        backward = SuiteConfig(ordering=Ordering.REVERSED, workers=2, timings=True)
        assert forward.params() == backward.params()
        assert "ordering" not in forward.params()


class TestRun:
    def test_small_instance_holds(self):
        report = run_theorem_suite(small_config())
        assert report.exit_code == 0
        assert not report.failures
        theorems = {r.theorem for r in report.reports}
        assert theorems == set(SMALL_CHECKS)
        assert report.summary()[Verdict.FAILS.value] == 0

    def test_hoprod_equality_covers_strategy_variants(self):
        report = run_theorem_suite(small_config(checks=["hoprod-equality"]))
        labels = {(r.params["expr"], r.params["strategy"]) for r in report.reports}
        assert ("crash(1)", "minimal+empty") in labels
        assert ("loss(1)", "minimal+p1") in labels
        assert len(report.reports) == 6

    def test_reports_are_sorted(self):
        report = run_theorem_suite(small_config())
        keys = [(r.theorem, json.dumps(r.params, sort_keys=True)) for r in report.reports]
        assert keys == sorted(keys)

    def test_orderings_give_identical_json(self):
        forward = run_theorem_suite(small_config(ordering=Ordering.FORWARD))
        backward = run_theorem_suite(small_config(ordering=Ordering.REVERSED))
        assert json.dumps(forward.to_json_dict(), sort_keys=True) == json.dumps(
            backward.to_json_dict(), sort_keys=True
        )

    def test_timings_are_opt_in(self):
        untimed = run_theorem_suite(small_config(checks=["floss-validity"]))
        timed = run_theorem_suite(small_config(checks=["floss-validity"], timings=True))
        assert "elapsed_ms" not in untimed.to_json_dict()["reports"][0]
        assert timed.reports[0].elapsed_ms is not None


def test_missing_certificate_is_not_a_failure():
    report = run_theorem_suite(small_config(checks=["domination-certificates"]))
    assert report.exit_code == 0
    loss = [r for r in report.reports if r.params["expected"] == "none"]
    assert loss[0].verdict is Verdict.HOLDS
    assert loss[0].witness["certificate"] == "none"


class TestFaultInjection:
    def test_floss_blocks_on_crashes(self):
        config = small_config(checks=["floss-validity"], overrides={"loss": "crash(1)"})
        report = run_theorem_suite(config)
        assert report.exit_code == 1
        failure = report.failures[0]
        assert failure.theorem == "floss-validity"
        assert "deadlock" in failure.witness

    def test_bad_override_becomes_a_failing_report(self):
        config = small_config(checks=["floss-validity"], overrides={"loss": "crash1@5"})
        report = run_theorem_suite(config)
        assert report.exit_code == 1
        assert "error" in report.failures[0].witness

    def test_cap_makes_a_check_partial(self):
        report = run_theorem_suite(small_config(checks=["fnf-characterization"], cap=1))
        assert report.exit_code == 0
        assert report.reports[0].verdict is Verdict.PARTIAL
        assert "HEARDOF_CAP" in report.reports[0].notes[0]


def test_every_check_is_registered_once():
    assert len(CHECKS) == 18


def test_horizon_sweep():
    sweep = run_horizon_sweep(small_config(checks=["fnf-characterization"]), [1, 2])
    assert [run.config["horizon"] for run in sweep.runs] == [1, 2]
    assert sweep.differences == []
    assert sweep.exit_code == 0
    sizes = [run.reports[0].params["size"] for run in sweep.runs]
    assert sizes == [9, 81]


def test_crash_combination_witness_is_a_delivered_collection(monkeypatch):
    def single_crash(n, horizon, faults, cap=None):
        return build_crashF(n, horizon, 1, cap)

    monkeypatch.setattr(suite, "build_crashF", single_crash)
    report = run_theorem_suite(small_config(checks=["crash-combination-identity"]))
    assert report.exit_code == 1
    witness = report.failures[0].witness["combination_only"]
    extra = DeliveredCollection.from_json(witness)
    assert isinstance(extra, DeliveredCollection)
    crash = build_crashF(2, 1, 1)
    assert extra.rows in combine_pred(crash, crash).tables
    assert extra.rows not in crash.tables


def test_property_preservation_counts_every_combination():
    config = small_config(checks=["property-preservation"])
    (report,) = run_theorem_suite(config).reports
    assert report.verdict is Verdict.HOLDS
    expected = 0
    for op, operands, _ in suite._applications(suite.SuiteContext(config)):
        for holds in (has_common_round, has_common_prefix):
            if all(holds(p) for p in operands):
                expected += 1
    assert report.params["applications"] == expected
