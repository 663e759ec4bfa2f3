"""Tests for backend.padic_core module."""
from fractions import Fraction

import pytest
from pydantic import ValidationError

from backend.errors import PadicDomainError, PadicZeroDivisionError, PrimeMismatchError
from backend.padic_core import (
    PadicNumber,
    field_arith,
    floor_log,
    is_odd_prime,
    iwasawa_log,
    padic_exp,
    parse_rational,
    rational_valuation,
    teichmuller,
)


def _q(value, p=5, n=4):
    return PadicNumber.from_rational(Fraction(value), p, n)


# ── Helpers ──────────────────────────────────────────────────

class TestHelpers:
    def test_rational_valuation(self):
        assert rational_valuation(Fraction(50, 3), 5) == 2
        assert rational_valuation(Fraction(3, 25), 5) == -2

    def test_floor_log(self):
        assert floor_log(1, 7) == 0
        assert floor_log(48, 7) == 1
        assert floor_log(49, 7) == 2

    def test_is_odd_prime(self):
        assert is_odd_prime(7)
        assert not is_odd_prime(2)
        assert not is_odd_prime(4)
        assert not is_odd_prime(9)

    def test_parse_rational(self):
        assert parse_rational("3/7") == Fraction(3, 7)
        assert parse_rational(" -5 ") == Fraction(-5)

    def test_parse_rational_empty(self):
        with pytest.raises(ValueError):
            parse_rational("")


# ── Construction ─────────────────────────────────────────────

class TestConstruction:
    def test_half_mod_625(self):
        x = _q(Fraction(1, 2))
        assert (x.valuation, x.unit, x.rel_precision) == (0, 313, 4)

    def test_valuation_extracted(self):
        x = _q(50)
        assert x.valuation == 2
        assert x.unit == 2
        assert x.absolute_precision == 6

    def test_zero(self):
        z = _q(0)
        assert z.is_zero
        assert z.absolute_precision == 4

    def test_non_canonical_rejected(self):
        with pytest.raises(ValidationError):
            PadicNumber(prime=5, valuation=0, unit=5, rel_precision=2)

    def test_truncate_never_adds_digits(self):
        x = _q(Fraction(1, 2))
        assert x.truncate(2).unit == 313 % 25
        assert x.truncate(9) == x

    def test_render(self):
        assert _q(Fraction(1, 2)).render() == "5^0 * 313 + O(5^4)"
        assert PadicNumber.zero(5, 3).render() == "0 + O(5^3)"

    def test_to_json(self):
        assert _q(10).to_json() == {"p": 5, "v": 1, "unit": "2", "prec": 4, "zero": False}


# ── Field arithmetic ─────────────────────────────────────────

class TestArithmetic:
    def test_add_gains_valuation(self):
        s = _q(5) + _q(20)
        assert (s.valuation, s.unit, s.rel_precision) == (2, 1, 3)

    def test_sub_to_zero(self):
        d = _q(7) - _q(7)
        assert d.is_zero
        assert d.absolute_precision == 4

    def test_mul_takes_min_precision(self):
        x = PadicNumber.from_rational(3, 7, 5) * PadicNumber.from_rational(7, 7, 3)
        assert (x.valuation, x.unit, x.rel_precision) == (1, 3, 3)

    def test_div(self):
        x = _q(1) / _q(2)
        assert x.unit == 313

    def test_div_by_zero(self):
        with pytest.raises(PadicZeroDivisionError):
            _q(1) / PadicNumber.zero(5, 4)

    def test_prime_mismatch(self):
        with pytest.raises(PrimeMismatchError):
            field_arith(_q(1), PadicNumber.from_rational(1, 7, 4), "add")

    def test_scalar_coercion(self):
        assert (_q(3) + 2).agrees_with(_q(5))
        assert (2 * _q(3)).agrees_with(_q(6))
        assert (1 - _q(3)).agrees_with(_q(-2))

    def test_pow(self):
        assert (_q(2) ** 3).agrees_with(_q(8))
        assert (_q(2) ** -1).agrees_with(_q(Fraction(1, 2)))

    def test_agrees_with_at_coarser_precision(self):
        assert _q(Fraction(1, 2), n=8).agrees_with(_q(Fraction(1, 2), n=3))


# ── Transcendental functions ─────────────────────────────────

class TestTranscendental:
    def test_teichmuller_is_root_of_unity(self):
        t = teichmuller(_q(2, n=6))
        assert t.unit % 5 == 2
        assert (t ** 4).agrees_with(PadicNumber.one(5, 6))

    def test_teichmuller_needs_unit(self):
        with pytest.raises(PadicDomainError):
            teichmuller(_q(5))

    def test_log_of_p_is_zero(self):
        assert iwasawa_log(PadicNumber.from_rational(7, 7, 10)).is_zero

    def test_log_of_root_of_unity_is_zero(self):
        assert iwasawa_log(teichmuller(_q(3, n=6))).is_zero

    def test_log_additive(self):
        a = PadicNumber.from_rational(8, 7, 10)
        b = PadicNumber.from_rational(15, 7, 10)
        assert iwasawa_log(a * b).agrees_with(iwasawa_log(a) + iwasawa_log(b))

    def test_log_of_zero(self):
        with pytest.raises(PadicDomainError):
            iwasawa_log(PadicNumber.zero(7, 4))

    def test_exp_inverts_log(self):
        a = PadicNumber.from_rational(8, 7, 10)
        assert padic_exp(iwasawa_log(a)).agrees_with(a)

    def test_exp_domain(self):
        with pytest.raises(PadicDomainError):
            padic_exp(_q(2))
