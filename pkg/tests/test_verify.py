"""Tests for backend.verify module."""
import pytest

from backend.frobenius_path import compute_associator
from backend.models import RunConfig, Suite
from backend.verify import check_shuffle, run_suites


@pytest.fixture(scope="module")
def cfg():
    return RunConfig(p=5, N=6, W=3)


@pytest.fixture(scope="module")
def assoc(cfg):
    return compute_associator(cfg.p, cfg.N, cfg.W)


class TestStandaloneSuites:
    def test_shuffle_needs_no_associator(self, cfg):
        rows = check_shuffle(cfg, None)
        assert rows
        assert all(r.passed for r in rows)

    def test_shuffle_report(self, cfg):
        report = run_suites(cfg, [Suite.shuffle])
        assert report.passed
        assert report.counts == {"shuffle": 0}

    def test_oracle(self, cfg):
        report = run_suites(cfg, [Suite.oracle])
        assert report.passed


class TestFullRun:
    def test_all_suites_pass(self, cfg, assoc):
        report = run_suites(cfg, assoc=assoc)
        failed = [r.name for r in report.checks if not r.passed]
        assert failed == []
        assert set(report.counts) == {s.value for s in Suite}

    @pytest.mark.parametrize("suite", [Suite.anchors, Suite.theorem, Suite.branch])
    def test_single_suite(self, cfg, assoc, suite):
        report = run_suites(cfg, [suite], assoc=assoc)
        assert report.passed
        assert all(r.suite == suite for r in report.checks)

    def test_report_echoes_parameters(self, cfg, assoc):
        report = run_suites(cfg, [Suite.grouplike], assoc=assoc)
        assert (report.p, report.N, report.W) == (5, 6, 3)
