"""Tests for the randomised check suites and their reports."""

import pytest

import triskells.checks as checks
from tests.conftest import TEST_TRIALS
from triskells.checks import SUITES, CheckReport, TrialOutcome, run_check
from triskells.errors import BoundExceeded, UnknownSuite
from triskells.relmat import mat_scale

EXPECTED_SUITES = {
    "thm3.1", "thm3.6", "thm4.3", "thm4.7", "thm5.1", "thm5.2",
    "prop6.8", "prop6.9", "prop6.12", "de-bridge", "mll-invariance", "mll-mapping",
}


def small_size(name: str) -> int:
    suite = SUITES[name]
    return max(suite.min_size, min(3, suite.size_limit))


class TestRegistry:
    """Registered suites and their bounds."""

    def test_every_suite_is_registered(self):
        assert set(SUITES) == EXPECTED_SUITES

    def test_defaults_respect_the_bounds(self):
        for suite in SUITES.values():
            assert suite.min_size <= suite.default_max_size <= suite.size_limit, suite.name

    def test_unknown_suite(self):
        with pytest.raises(UnknownSuite):
            run_check("thm9.9")

    def test_size_above_the_limit(self):
        with pytest.raises(BoundExceeded):
            run_check("thm4.7", trials=1, max_size=SUITES["thm4.7"].size_limit + 1)

    def test_size_below_the_minimum(self):
        with pytest.raises(BoundExceeded):
            run_check("mll-mapping", trials=1, max_size=2)


@pytest.mark.smoke
class TestSuitesPass:
    """Each suite holds on a handful of small trials."""

    @pytest.mark.parametrize("name", sorted(EXPECTED_SUITES))
    def test_suite(self, name):
        report = run_check(name, seed=3, trials=TEST_TRIALS, max_size=small_size(name), jobs=1)
        assert report.ok, report.summary_lines()
        assert len(report.outcomes) == TEST_TRIALS

    @pytest.mark.property
    @pytest.mark.parametrize("name", ["thm3.1", "thm4.3", "thm5.1", "prop6.8"])
    def test_suite_at_its_default_size(self, name):
        report = run_check(name, seed=11, trials=TEST_TRIALS)
        assert report.ok, report.summary_lines()


class TestReports:
    """Reproducible reports."""

    def test_same_seed_same_report(self):
        first = run_check("thm4.7", seed=5, trials=TEST_TRIALS, max_size=3)
        second = run_check("thm4.7", seed=5, trials=TEST_TRIALS, max_size=3)
        assert first.to_dict() == second.to_dict()

    def test_parallel_trials_give_the_same_report(self):
        serial = run_check("thm5.1", seed=8, trials=TEST_TRIALS, max_size=4, jobs=1)
        parallel = run_check("thm5.1", seed=8, trials=TEST_TRIALS, max_size=4, jobs=3)
        assert serial.to_dict() == parallel.to_dict()

    def test_seed_defaults_to_the_config(self):
        assert run_check("thm3.6", trials=2, max_size=2).seed == 7

    def test_report_fields(self):
        doc = run_check("thm5.1", seed=1, trials=3, max_size=3).to_dict()
        assert set(doc) == {"suite", "seed", "trials", "max_size", "tol", "passed", "failed", "ok",
                            "failures", "first_counterexample"}
        assert doc["passed"] == 3 and doc["failed"] == 0
        assert doc["first_counterexample"] is None

    def test_summary_lines(self):
        passing = CheckReport("demo", 1, 2, 3, 1e-9, [TrialOutcome(0, True), TrialOutcome(1, True)])
        assert passing.summary_lines() == ["✓ demo: 2/2 trials passed (seed 1)"]
        failing = CheckReport("demo", 1, 2, 3, 1e-9, [TrialOutcome(0, True), TrialOutcome(1, False, "boom", {})])
        assert failing.summary_lines() == [
            "✗ demo: 1/2 trials failed (seed 1)",
            "  first failure at trial 1: boom",
        ]


class TestFailuresAreReported:
    """A broken functor is caught with a counterexample."""

    def test_doubled_fock_image(self, monkeypatch):
        real = checks.fock_rel

        def doubled(m, *args, **kwargs):
            return mat_scale(2, real(m, *args, **kwargs))

        monkeypatch.setattr(checks, "fock_rel", doubled)
        report = run_check("thm5.1", seed=2, trials=TEST_TRIALS, max_size=4)
        assert not report.ok
        doc = report.to_dict()
        assert doc["first_counterexample"]["data"]["a"]["rows"]
        assert report.summary_lines()[0].startswith("✗ thm5.1")

    def test_library_errors_become_failures(self, monkeypatch):
        def broken(*args, **kwargs):
            raise BoundExceeded("too big")

        monkeypatch.setattr(checks, "fock_rel", broken)
        report = run_check("thm5.1", seed=2, trials=2, max_size=3)
        assert [o.detail for o in report.failures] == ["BoundExceeded: too big"] * 2
