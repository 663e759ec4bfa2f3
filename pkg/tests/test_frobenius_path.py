"""Tests for backend.frobenius_path module."""
from unittest.mock import patch

import pytest

from backend.errors import (
    ConfigError,
    DiscError,
    SolverError,
    UnsupportedBasepointError,
    WeightOverflowError,
)
from backend.frobenius_path import (
    Basepoint,
    FormalPeriod,
    PathContext,
    check_gauge,
    checked_gauge,
    coleman_iterint,
    compute_associator,
    depth_one_gauge_entry,
    frobenius_gauge,
    frobenius_pin,
    gauge_value_at_one,
    per_af,
    per_cl,
    pmzv,
)
from backend.kz_polylog import LogPolySeries, build_li_table, degree_for, nested_sum_oracle
from backend.nc_series import is_grouplike, nc_inverse, nc_mul, pair
from backend.padic_core import PadicNumber, iwasawa_log
from backend.padic_zeta import depth_one_zeta
from backend.shuffle_words import (
    DEFAULT,
    EMPTY,
    ShuffleElement,
    Word,
    antipode,
    shuffle,
    word_to_index,
)


@pytest.fixture(scope="module")
def assoc():
    return compute_associator(7, 10, 4)


@pytest.fixture()
def ctx(assoc):
    return PathContext(associator=assoc)


def _pt(value, p=7, n=10):
    return Basepoint.at(PadicNumber.from_rational(value, p, n))


class TestBasepoint:
    def test_parse_tangents(self):
        assert Basepoint.parse("0", 7, 10).kind == "tangent0"
        assert Basepoint.parse("-1_1", 7, 10).kind == "tangent1"

    def test_disc_tags(self):
        assert Basepoint.parse("14", 7, 10).disc == 0
        assert Basepoint.parse("8/1", 7, 10).disc == 1

    def test_point_outside_discs(self):
        with pytest.raises(DiscError):
            Basepoint.parse("3", 7, 10)


class TestGauge:
    def test_log_free(self):
        gauge = frobenius_gauge(5, 3, 11)
        assert all(f.is_log_free() for f in gauge.coeffs.values())

    def test_depth_one_entries(self):
        gauge = frobenius_gauge(5, 3, 11)
        assert gauge.coeff("1") == depth_one_gauge_entry(1, 5, 11)
        assert gauge.coeff("001") == depth_one_gauge_entry(3, 5, 11)

    def test_check_returns_degree(self):
        assert check_gauge(5, 3) == 11

    def test_pin_matches_kubota_leopoldt(self):
        gauge = checked_gauge(5, 3)
        pin = frobenius_pin(gauge, 3, 5, 10)
        assert not pin.is_zero
        assert pin.agrees_with(depth_one_zeta(3, 5, 10))

    @pytest.mark.parametrize("p", [5, 7, 11])
    def test_even_weight_value_vanishes(self, p):
        gauge = checked_gauge(p, 4)
        assert gauge_value_at_one(gauge.coeff_or_zero("01"), 2, p, 10).is_zero
        assert gauge_value_at_one(gauge.coeff_or_zero("0001"), 4, p, 10).is_zero

    def test_misshapen_entry_rejected(self):
        entry = checked_gauge(5, 3).coeff_or_zero("01") + LogPolySeries.constant(1, 11)
        with pytest.raises(SolverError):
            gauge_value_at_one(entry, 2, 5, 10)


class TestAssociator:
    def test_constant_is_one(self, assoc):
        assert assoc.coeff(EMPTY).agrees_with(PadicNumber.one(7, 10))

    def test_weight_one_vanishes(self, assoc):
        assert assoc.coeff("0").is_zero
        assert assoc.coeff("1").is_zero

    def test_zeta2_vanishes(self, assoc):
        assert pmzv((2,), assoc).is_zero

    def test_zeta3_pinned(self, assoc):
        assert pmzv((3,), assoc).agrees_with(depth_one_zeta(3, 7, 10))

    def test_zeta21_equals_zeta3(self, assoc):
        assert pmzv((2, 1), assoc).agrees_with(pmzv((3,), assoc))

    def test_grouplike(self, assoc):
        assert is_grouplike(assoc.series).is_zero

    def test_shuffle_consistency(self, assoc):
        u, v = Word(letters="0"), Word(letters="011")
        assert pair(shuffle(u, v), assoc.series).agrees_with(pmzv(u, assoc) * pmzv(v, assoc))

    def test_full_rank_each_weight(self, assoc):
        assert [s.weight for s in assoc.stats] == [2, 3, 4]
        assert all(s.rank == s.unknowns for s in assoc.stats)

    def test_deterministic(self, assoc):
        assert compute_associator(7, 10, 4).series == assoc.series

    def test_torsor(self, assoc):
        product = nc_mul(assoc.series, nc_inverse(assoc.series))
        assert all(c.is_zero for w, c in product.coeffs.items() if w != EMPTY)
        inverse = nc_inverse(assoc.series)
        for w in DEFAULT.words_up_to(4):
            assert pair(w, inverse).agrees_with(pair(antipode(w), assoc.series))

    def test_empty_word(self, assoc):
        assert pmzv("", assoc).agrees_with(PadicNumber.one(7, 10))

    def test_weight_overflow(self, assoc):
        with pytest.raises(WeightOverflowError):
            pmzv("00001", assoc)

    def test_bad_prime(self):
        with pytest.raises(ConfigError):
            compute_associator(9, 10, 3)

    def test_wrong_pin_is_caught(self):
        with patch("backend.frobenius_path.depth_one_zeta",
                   side_effect=lambda k, p, n: PadicNumber.one(p, n)):
            with pytest.raises(SolverError) as exc:
                compute_associator(5, 6, 2)
        assert exc.value.weight == 2

    def test_tampered_gauge_is_caught(self):
        real = checked_gauge(5, 3)
        doubled = real.map_coeffs(lambda f: f.scale(2))
        with patch("backend.frobenius_path.checked_gauge", return_value=doubled):
            with pytest.raises(SolverError) as exc:
                compute_associator(5, 6, 3)
        assert exc.value.weight == 3


class TestAssociatorGrid:
    @pytest.mark.parametrize("p", [5, 7, 11])
    @pytest.mark.parametrize("weight_cap", [2, 3, 4])
    def test_solves_and_is_grouplike(self, p, weight_cap):
        result = compute_associator(p, 10, weight_cap)
        assert is_grouplike(result.series).is_zero
        for w in DEFAULT.words_up_to(2):
            if w != EMPTY:
                assert result.coeff(w).is_zero
        if weight_cap >= 3:
            assert pmzv((3,), result).agrees_with(depth_one_zeta(3, p, 10))


class TestIterint:
    def test_empty_word(self, ctx):
        value, _ = coleman_iterint(_pt(7), _pt(14), Word(), ctx)
        assert value.agrees_with(PadicNumber.one(7, 10))

    def test_disc_of_zero(self, ctx):
        z = PadicNumber.from_rational(7, 7, 10)
        value, route = coleman_iterint(Basepoint.tangent_at_zero(), Basepoint.at(z), Word(letters="1"), ctx)
        assert route == "disc0"
        assert value.agrees_with(-iwasawa_log(1 - z))

    @pytest.mark.parametrize("q", [8, -6, 50])
    def test_disc_of_one_binds_log(self, ctx, q):
        z = PadicNumber.from_rational(q, 7, 10)
        value, route = coleman_iterint(Basepoint.tangent_at_zero(), Basepoint.at(z), Word(letters="0"), ctx)
        assert route == "disc1"
        assert value.agrees_with(iwasawa_log(z))

    def test_same_disc(self, ctx):
        b = PadicNumber.from_rational(7, 7, 10)
        c = PadicNumber.from_rational(14, 7, 10)
        value, route = coleman_iterint(Basepoint.at(b), Basepoint.at(c), Word(letters="1"), ctx)
        assert route == "samedisc"
        assert value.agrees_with(iwasawa_log(1 - b) - iwasawa_log(1 - c))

    def test_reverse(self, ctx):
        value, route = coleman_iterint(Basepoint.tangent_at_one(), Basepoint.tangent_at_zero(),
                                       Word(letters="0"), ctx)
        assert route == "reverse"
        assert value.is_zero

    def test_mzv_route(self, ctx, assoc):
        value, route = coleman_iterint(Basepoint.tangent_at_zero(), Basepoint.tangent_at_one(),
                                       Word(letters="001"), ctx)
        assert route == "af"
        assert value == pmzv((3,), assoc)


class TestPeriods:
    def test_per_af_matches_pmzv(self, ctx, assoc):
        assert per_af(FormalPeriod.mzv("01"), ctx) == pmzv((2,), assoc)

    def test_per_af_empty(self, ctx):
        assert per_af(FormalPeriod.mzv(""), ctx).agrees_with(PadicNumber.one(7, 10))

    def test_per_af_disc_of_zero(self, ctx):
        z = PadicNumber.from_rational(14, 7, 10)
        sym = FormalPeriod(lower=Basepoint.tangent_at_zero(), upper=Basepoint.at(z),
                           functional=FormalPeriod.mzv("1").functional)
        assert per_af(sym, ctx).agrees_with(-iwasawa_log(1 - z))

    def test_pipelines_agree_bit_exact(self, ctx, assoc):
        for w in DEFAULT.words_up_to(4):
            assert per_af(FormalPeriod.mzv(w), ctx) == per_cl(w, assoc)

    def test_per_cl_weight_one(self, assoc):
        assert per_cl("0", assoc).is_zero

    def test_name(self):
        assert FormalPeriod.mzv("01").name == "I_{1_0}^{-1_1}(01)"


class TestPathContext:
    def test_remember_rejects_wrong_disc(self, ctx):
        with pytest.raises(UnsupportedBasepointError):
            ctx.remember(1, build_li_table(2, 4))

    def test_remember_keeps_larger_table(self, assoc):
        local = PathContext(associator=assoc)
        big = build_li_table(assoc.weight_cap, assoc.degree_cap + 5)
        local.remember(0, big)
        local.remember(0, build_li_table(assoc.weight_cap, 3))
        assert local.table(0).degree_cap == assoc.degree_cap + 5

    def test_disc_of_one_escalation_is_kept(self):
        local = PathContext(associator=compute_associator(5, 10, 3))
        z = PadicNumber.from_rational(6, 5, 10)
        value, route = coleman_iterint(Basepoint.tangent_at_zero(), Basepoint.at(z), Word(letters="0"), local)
        assert route == "disc1"
        assert value.agrees_with(iwasawa_log(z))
        assert local.table(1).at_one
        assert local.table(1).degree_cap > local.associator.degree_cap


class TestRouteConsistency:
    @pytest.mark.parametrize("q", [7, 49, 56])
    def test_word_and_functional_match_nested_sum(self, ctx, q):
        z = PadicNumber.from_rational(q, 7, 10)
        start, end = Basepoint.tangent_at_zero(), Basepoint.at(z)
        for w in DEFAULT.words_up_to(3):
            if not w.letters.endswith("1"):
                continue
            index = word_to_index(w)
            expected = nested_sum_oracle(index, z, degree_for(10, z.valuation, len(w), 7, 1), 10)
            by_word, route = coleman_iterint(start, end, w, ctx)
            by_functional, _ = coleman_iterint(start, end, ShuffleElement.of(w), ctx)
            assert route == "disc0"
            assert by_word.agrees_with(expected), w.letters
            assert by_functional.agrees_with(expected), w.letters
