"""Tests for backend.kz_polylog module."""
from fractions import Fraction

import pytest

from backend.errors import DiscError, InsufficientTermsError, NotInvertibleError
from backend.kz_polylog import (
    LogPolySeries,
    build_li_table,
    check_differential,
    degree_for,
    dump_table,
    eval_li,
    eval_table,
    local_table_at_one,
    nested_sum_oracle,
    rebuild_table,
    substitute_power,
    tail_bound,
    theta,
    theta_inverse,
    transport_to_one,
)
from backend.nc_series import is_grouplike
from backend.padic_core import PadicNumber, iwasawa_log
from backend.shuffle_words import DEFAULT, Alphabet, Word, word_to_index


def _point(value, p, n):
    return PadicNumber.from_rational(Fraction(value), p, n)


def _oracle(index, z, n):
    terms = degree_for(n, z.valuation, sum(index), z.prime, 1)
    return nested_sum_oracle(index, z, terms, n)


@pytest.fixture(scope="module")
def table():
    return build_li_table(3, 10)


class TestLogPolySeries:
    def test_zero_parts_dropped(self):
        f = LogPolySeries.build(4, {0: [0, 0], 2: [1]})
        assert set(f.parts) == {2}

    def test_ring_ops(self):
        t = LogPolySeries.from_t_coeffs([0, 1], 4)
        one_minus_t = 1 - t
        inv = 1 / one_minus_t
        assert inv.part(0) == tuple(Fraction(1) for _ in range(5))

    def test_product_truncates_at_degree_cap(self):
        t3 = LogPolySeries.from_t_coeffs([0, 0, 0, 1], 4)
        assert (t3 * t3).is_zero
        log = LogPolySeries.log_power(1, 4)
        assert log * log == LogPolySeries.log_power(2, 4)

    def test_theta_inverse_of_log_times_t(self):
        t = LogPolySeries.from_t_coeffs([0, 1], 4)
        f = LogPolySeries.log_power(1, 4) * t
        assert theta_inverse(f) == f - t
        assert theta_inverse(t) == t

    def test_log_series_not_invertible(self):
        with pytest.raises(NotInvertibleError):
            1 / LogPolySeries.log_power(1, 4)

    def test_theta_of_log(self):
        assert theta(LogPolySeries.log_power(1, 3)) == LogPolySeries.constant(1, 3)

    def test_theta_inverse_round_trip(self):
        f = LogPolySeries.build(5, {0: [0, 1, 0, 2], 2: [0, 0, 0, 1], 1: [3]})
        assert theta(theta_inverse(f)) == f

    def test_substitute_power(self):
        f = LogPolySeries.build(9, {0: [0, 1, Fraction(1, 2)], 1: [1]})
        g = substitute_power(f, 3)
        assert g.coefficient(0, 3) == 1
        assert g.coefficient(0, 6) == Fraction(1, 2)
        assert g.coefficient(1, 0) == 3

    def test_to_json(self):
        out = LogPolySeries.build(2, {0: [0, Fraction(1, 2)]}).to_json()
        assert out == {"0": ["0/1", "1/2", "0/1"]}


class TestTable:
    def test_li1(self, table):
        assert table.get("1").part(0)[1:] == tuple(Fraction(1, n) for n in range(1, 11))

    def test_li0_is_log(self, table):
        assert table.get("0") == LogPolySeries.log_power(1, 10)

    def test_pure_log_words(self, table):
        assert table.get("000") == LogPolySeries.log_power(3, 10).scale(Fraction(1, 6))

    def test_dilogarithm(self, table):
        assert table.get("01").part(0)[1:] == tuple(Fraction(1, n * n) for n in range(1, 11))

    def test_shuffle_relation(self, table):
        assert table.get("10") == table.get("0") * table.get("1") - table.get("01")

    def test_differential_equation(self, table):
        assert check_differential(table) == []

    def test_grouplike(self, table):
        assert is_grouplike(table.series()).is_zero

    def test_general_puncture(self):
        alphabet = Alphabet.from_punctures({"0": 0, "1": 1, "2": -1})
        t2 = build_li_table(2, 6, alphabet)
        assert t2.get("2").coefficient(0, 1) == -1
        assert t2.get("2").coefficient(0, 2) == Fraction(1, 2)
        assert check_differential(t2) == []

    def test_threads_do_not_change_table(self):
        assert build_li_table(3, 6, threads=4).entries == build_li_table(3, 6).entries

    def test_dump(self, table):
        dumped = dump_table(table)
        assert list(dumped)[:3] == ["", "0", "1"]
        assert dumped["1"]["0"][2] == "1/2"


class TestLocalTableAtOne:
    def test_letter_exchange_with_sign(self, table):
        at_one = transport_to_one(table)
        assert at_one.get("0") == -table.get("1")
        assert at_one.get("01") == table.get("10")

    def test_involution(self, table):
        assert transport_to_one(transport_to_one(table)).entries == table.entries

    def test_builder(self):
        assert local_table_at_one(2, 5).get("1") == -LogPolySeries.log_power(1, 5)


class TestEvaluation:
    def test_li1_is_minus_log(self):
        z = _point(7, 7, 10)
        value, _ = eval_li(build_li_table(1, 4), "1", z, 10)
        assert value.agrees_with(-iwasawa_log(1 - z))

    def test_dilog_matches_oracle(self):
        z = _point(5, 5, 8)
        value, _ = eval_li(build_li_table(2, 4), "01", z, 8)
        assert value.agrees_with(_oracle((2,), z, 8))

    def test_depth_two_matches_oracle(self):
        z = _point(7, 7, 8)
        value, _ = eval_li(build_li_table(3, 4), "011", z, 8)
        assert value.agrees_with(_oracle((2, 1), z, 8))

    def test_degree_escalates(self):
        z = _point(5, 5, 10)
        _, used = eval_li(build_li_table(2, 2), "01", z, 10)
        assert used.degree_cap > 2

    def test_value_vanishes_at_zero(self):
        value, _ = eval_li(build_li_table(2, 4), "11", _point(7, 7, 6), 6)
        assert value.is_zero or value.valuation >= 1

    def test_outside_disc(self):
        with pytest.raises(DiscError):
            eval_li(build_li_table(1, 4), "1", _point(3, 7, 6))

    def test_eval_table(self):
        z = _point(49, 7, 6)
        series, _ = eval_table(build_li_table(2, 4), z, 6)
        assert series.coeff("1").agrees_with(-iwasawa_log(1 - z))
        assert series.constant.agrees_with(PadicNumber.one(7, 6))


class TestOracle:
    def test_log_series(self):
        z = _point(10, 5, 6)
        assert _oracle((1,), z, 6).agrees_with(-iwasawa_log(1 - z))

    def test_leading_valuation(self):
        assert _oracle((2,), _point(25, 5, 6), 6).valuation >= 2

    def test_insufficient_terms(self):
        with pytest.raises(InsufficientTermsError):
            nested_sum_oracle((2,), _point(5, 5, 10), 3, 10)

    def test_tail_bound(self):
        assert tail_bound(10, 1, 1, 7) == 10
        assert tail_bound(10, 2, 2, 7) > tail_bound(10, 1, 2, 7)


class TestTransportFlag:
    def test_transport_marks_disc(self, table):
        assert not table.at_one
        assert transport_to_one(table).at_one
        assert not transport_to_one(transport_to_one(table)).at_one

    def test_rebuild_keeps_transport(self):
        rebuilt = rebuild_table(local_table_at_one(2, 4), 9)
        assert rebuilt.at_one
        assert rebuilt.degree_cap == 9
        assert rebuilt.entries == local_table_at_one(2, 9).entries

    def test_escalation_in_disc_of_one(self):
        z = _point(6, 5, 10)
        series, used = eval_table(local_table_at_one(3, 11), 1 - z, 10)
        assert used.at_one
        assert used.degree_cap > 11
        assert series.coeff("0").agrees_with(iwasawa_log(z))

    def test_eval_li_escalation_in_disc_of_one(self):
        z = _point(6, 5, 10)
        value, used = eval_li(local_table_at_one(2, 2), "0", 1 - z, 10)
        assert used.at_one
        assert value.agrees_with(iwasawa_log(z))


def _terminated_words(weight_cap):
    return [w for w in DEFAULT.words_up_to(weight_cap) if w.letters.endswith("1")]


@pytest.fixture(scope="module", params=[5, 7])
def wide_table(request):
    return request.param, build_li_table(4, 32)


class TestOracleGrid:
    @pytest.mark.parametrize("shape", ["p", "p^2", "p+p^2"])
    def test_every_word_matches_nested_sum(self, wide_table, shape):
        p, grid_table = wide_table
        value = {"p": p, "p^2": p * p, "p+p^2": p + p * p}[shape]
        z = _point(value, p, 10)
        for w in _terminated_words(4):
            got, grid_table = eval_li(grid_table, w, z, 10)
            assert got.agrees_with(_oracle(word_to_index(w), z, 10)), w.letters
