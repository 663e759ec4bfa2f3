"""Tests for backend.models module."""
import pytest
from fractions import Fraction
from pydantic import ValidationError
from backend.models import (
    CheckResult, Manifest, PadicValue, RunConfig, Suite, ValueResult,
)
from backend.padic_core import PadicNumber


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert (cfg.p, cfg.N, cfg.W) == (7, 10, 4)
        assert cfg.degree is None
        assert len(cfg.suites) == len(Suite)

    def test_non_prime_rejected(self):
        with pytest.raises(ValidationError, match="p must be an odd prime"):
            RunConfig(p=4)

    def test_two_rejected(self):
        with pytest.raises(ValidationError):
            RunConfig(p=2)

    def test_precision_bounds(self):
        with pytest.raises(ValidationError):
            RunConfig(N=65)
        with pytest.raises(ValidationError):
            RunConfig(N=0)

    def test_weight_bounds(self):
        with pytest.raises(ValidationError):
            RunConfig(W=7)

    def test_degree(self):
        assert RunConfig(D="auto").degree is None
        assert RunConfig(D=20).degree == 20
        with pytest.raises(ValidationError):
            RunConfig(D=0)

    def test_index_entries_positive(self):
        with pytest.raises(ValidationError):
            RunConfig(index=[2, 0])


class TestPadicValue:
    def test_of(self):
        v = PadicValue.of(PadicNumber.from_rational(Fraction(10), 5, 4))
        assert (v.p, v.v, v.unit, v.prec, v.zero) == (5, 1, "2", 4, False)
        assert v.text == "5^1 * 2 + O(5^5)"

    def test_zero(self):
        v = PadicValue.of(PadicNumber.zero(7, 3))
        assert v.zero
        assert v.text == "0 + O(7^3)"


class TestResults:
    def test_value_result_route(self):
        value = PadicValue.of(PadicNumber.one(7, 4))
        r = ValueResult(p=7, N=4, word="", route="af", value=value,
                        manifest=Manifest(p=7, N=4, W=2))
        assert r.route.value == "af"

    def test_unknown_route(self):
        value = PadicValue.of(PadicNumber.one(7, 4))
        with pytest.raises(ValidationError):
            ValueResult(p=7, N=4, word="", route="nowhere", value=value)

    def test_check_result_defaults(self):
        c = CheckResult(suite=Suite.torsor, name="x", passed=True)
        assert c.residual == "0"
