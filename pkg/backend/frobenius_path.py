"""
The Frobenius-fixed path from 1 at 0 to -1 at 1 and the period pipelines.

Frobenius model: the lift t -> t^p, acting on letters by e_i -> p * e_i.
The comparison gauge

    Gamma(t) = G(t^p) * (G with letters scaled by p)(t)^(-1)

built from the generating series G of the polylog table is free of log t,
and its depth-one entries are -p^k * sum_{p!|n} t^n / n^k. Evaluated at
t = 1 (where those series overconverge) this pins the depth-one
coefficients of the fixed path to zeta_p(k). Everything else follows from
group-likeness, the harmonic product on convergent words and the
regularization relation linking the two, solved weight by weight.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict
from sympy import Rational, zeros

from backend.errors import (
    ConfigError,
    DiscError,
    SolverError,
    UnsupportedBasepointError,
    WeightOverflowError,
)
from backend.kz_polylog import (
    LiTable,
    LogPolySeries,
    build_li_table,
    eval_li,
    eval_table,
    local_table_at_one,
    substitute_power,
)
from backend.nc_series import (
    NCSeries,
    is_grouplike,
    nc_inverse,
    nc_mul,
    pair,
    scale_letters,
)
from backend.padic_core import (
    PadicNumber,
    is_odd_prime,
    iwasawa_log,
    parse_rational,
    rational_valuation,
)
from backend.padic_zeta import depth_one_zeta, hurwitz_zeta
from backend.shuffle_words import (
    DEFAULT,
    EMPTY,
    ShuffleElement,
    Word,
    index_to_word,
    is_convergent,
    shuffle,
    stuffle,
    word_to_index,
)
from config import MAX_SOLVER_WEIGHT, SOLVER_GUARD_DIGITS

logger = logging.getLogger(__name__)

Route = Literal["af", "cl", "disc0", "disc1", "samedisc", "reverse"]


# ── Basepoints ───────────────────────────────────────────────

class Basepoint(BaseModel):
    """Tangent vector 1 at 0, tangent vector -1 at 1, or a p-adic point."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["tangent0", "tangent1", "point"]
    point: Optional[PadicNumber] = None

    @classmethod
    def tangent_at_zero(cls) -> "Basepoint":
        return cls(kind="tangent0")

    @classmethod
    def tangent_at_one(cls) -> "Basepoint":
        return cls(kind="tangent1")

    @classmethod
    def at(cls, z: PadicNumber) -> "Basepoint":
        b = cls(kind="point", point=z)
        _ = b.disc
        return b

    @classmethod
    def parse(cls, text: str, p: int, precision: int) -> "Basepoint":
        """"0" or "1_0" for 1 at 0, "1" or "-1_1" for -1 at 1, else a rational a/b."""
        text = text.strip()
        if text in ("0", "1_0"):
            return cls.tangent_at_zero()
        if text in ("1", "-1_1"):
            return cls.tangent_at_one()
        return cls.at(PadicNumber.from_rational(parse_rational(text), p, precision))

    @property
    def disc(self) -> int:
        if self.kind == "tangent0":
            return 0
        if self.kind == "tangent1":
            return 1
        z = self.point
        if not z.is_zero and z.valuation >= 1:
            return 0
        s = 1 - z
        if not s.is_zero and s.valuation >= 1:
            return 1
        raise DiscError(f"{z.render()} lies in neither the disc of 0 nor the disc of 1")

    def label(self) -> str:
        if self.kind == "tangent0":
            return "1_0"
        if self.kind == "tangent1":
            return "-1_1"
        return self.point.render()


# ── Frobenius comparison gauge ───────────────────────────────

def frobenius_gauge(p: int, weight_cap: int, degree_cap: int) -> NCSeries:
    """Gamma(t) over the log-poly ring."""
    G = build_li_table(weight_cap, degree_cap).series()
    pulled = G.map_coeffs(lambda f: substitute_power(f, p))
    scaled = scale_letters(G, {c: p for c in G.alphabet.letters})
    return nc_mul(pulled, nc_inverse(scaled))


def depth_one_gauge_entry(k: int, p: int, degree_cap: int) -> LogPolySeries:
    """-p^k * sum_{n <= D, p!|n} t^n / n^k."""
    coeffs = [Fraction(0)] * (degree_cap + 1)
    for n in range(1, degree_cap + 1):
        if n % p:
            coeffs[n] = Fraction(-(p ** k), n ** k)
    return LogPolySeries.from_t_coeffs(coeffs, degree_cap)


@lru_cache(maxsize=None)
def checked_gauge(p: int, weight_cap: int) -> NCSeries:
    """The gauge at t-degree 2p + 1, after the log-free and depth-one checks."""
    degree_cap = 2 * p + 1
    gauge = frobenius_gauge(p, weight_cap, degree_cap)
    for w, f in gauge.sorted_items():
        if not f.is_log_free():
            raise SolverError(f"gauge entry {w.letters!r} carries log t", weight=len(w))
    for k in range(1, weight_cap + 1):
        w = _depth_one_word(k)
        got = gauge.coeff_or_zero(w)
        if got != depth_one_gauge_entry(k, p, degree_cap):
            raise SolverError(f"depth-one gauge entry {w.letters!r} is off", weight=k)
    logger.debug("checked_gauge: p=%d W=%d log-free to t^%d", p, weight_cap, degree_cap)
    return gauge


def check_gauge(p: int, weight_cap: int) -> int:
    """Raise SolverError unless the gauge passes; returns the t-degree used."""
    return checked_gauge(p, weight_cap).constant.degree_cap


def _depth_one_word(k: int) -> Word:
    return Word(letters="0" * (k - 1) + "1")


def gauge_value_at_one(entry: LogPolySeries, k: int, p: int, precision: int) -> PadicNumber:
    """Value at t = 1 of a depth-one gauge entry c * sum_{p!|n} t^n / n^k.

    c is read off the entry. The residue class a + pZ contributes
    c * p^-k * zeta_p(k, a/p); the result is good to O(p^precision).
    """
    D = entry.degree_cap
    c = entry.coefficient(0, 1)
    shape = [Fraction(0)] + [c / Fraction(n) ** k if n % p else Fraction(0) for n in range(1, D + 1)]
    if entry != LogPolySeries.from_t_coeffs(shape, D):
        raise SolverError(f"gauge entry is not c * sum t^n / n^{k} off multiples of {p}", weight=k)
    if not c:
        return PadicNumber.zero(p, precision)
    factor = c / p ** k
    inner = precision - rational_valuation(factor, p)
    total = hurwitz_zeta(k, Fraction(1, p), p, inner)
    for a in range(2, p):
        total = total + hurwitz_zeta(k, Fraction(a, p), p, inner)
    return total * factor


def frobenius_pin(gauge: NCSeries, k: int, p: int, precision: int) -> PadicNumber:
    """Depth-one coefficient fixed by Frobenius: (1 - p^k) x = Gamma_{0^(k-1)1}(1).

    Carries `precision` significant digits, or is zero at precision >= precision + k.
    """
    entry = gauge.coeff_or_zero(_depth_one_word(k))
    target = precision + k + 2
    for _ in range(8):
        value = gauge_value_at_one(entry, k, p, target) * Fraction(1, 1 - p ** k)
        if value.is_zero or value.rel_precision >= precision:
            return value
        target += precision - value.rel_precision
    raise SolverError(f"no {precision} significant digits for the weight {k} pin", weight=k)


# ── Associator ───────────────────────────────────────────────

class SolverStats(BaseModel):
    weight: int
    unknowns: int
    equations: int
    rank: int


class Associator(BaseModel):
    """Coefficients of the Frobenius-fixed path up to `weight_cap`.

    Each weight is solved at `precision` + SOLVER_GUARD_DIGITS and every
    coefficient is then truncated to absolute precision O(p^precision), so
    a coefficient of valuation v carries precision - v significant digits.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    prime: int
    precision: int
    weight_cap: int
    degree_cap: int
    series: NCSeries
    stats: List[SolverStats] = []

    def coeff(self, w: Union[Word, str]) -> PadicNumber:
        return self.series.coeff_or_zero(w)


def _shuffle_rows(m: int, phi: Dict[Word, PadicNumber]) -> List[Tuple[Dict[Word, Fraction], PadicNumber]]:
    rows = []
    for a in range(1, m // 2 + 1):
        left = DEFAULT.words(a)
        right = DEFAULT.words(m - a)
        for u in left:
            for v in right:
                if a == m - a and DEFAULT.sort_key(v) < DEFAULT.sort_key(u):
                    continue
                rows.append((dict(shuffle(u, v).terms), phi[u] * phi[v]))
    return rows


def _stuffle_rows(m: int, phi: Dict[Word, PadicNumber]) -> List[Tuple[Dict[Word, Fraction], PadicNumber]]:
    rows = []
    for a in range(2, m // 2 + 1):
        for u in filter(is_convergent, DEFAULT.words(a)):
            for v in filter(is_convergent, DEFAULT.words(m - a)):
                if a == m - a and DEFAULT.sort_key(v) < DEFAULT.sort_key(u):
                    continue
                terms = {
                    index_to_word(c): Fraction(n)
                    for c, n in stuffle(word_to_index(u), word_to_index(v)).items()
                }
                rows.append((terms, phi[u] * phi[v]))
    return rows


def _regularization_rows(m: int, zero: PadicNumber) -> List[Tuple[Dict[Word, Fraction], PadicNumber]]:
    """(e1 sh w - e1 w) - ((1) * k - (1, k)) = 0 for convergent w of weight m - 1."""
    rows = []
    e1 = Word(letters="1")
    for w in filter(is_convergent, DEFAULT.words(m - 1)):
        terms: Dict[Word, Fraction] = {}
        for x, n in shuffle(e1, w).terms.items():
            if x != e1 + w:
                terms[x] = terms.get(x, Fraction(0)) + n
        k = word_to_index(w)
        for c, n in stuffle((1,), k).items():
            if c != (1,) + k:
                x = index_to_word(c)
                terms[x] = terms.get(x, Fraction(0)) - n
        terms = {x: c for x, c in terms.items() if c}
        if terms:
            rows.append((terms, zero))
    return rows


def _solve_weight(
    m: int,
    rows: Sequence[Tuple[Dict[Word, Fraction], PadicNumber]],
    unknowns: List[Word],
) -> Tuple[Dict[Word, PadicNumber], SolverStats]:
    column = {w: j for j, w in enumerate(unknowns)}
    A = zeros(len(rows), len(unknowns))
    for i, (terms, _) in enumerate(rows):
        for w, c in terms.items():
            A[i, column[w]] = Rational(c.numerator, c.denominator)
    _, pivots = A.T.rref()
    rank = len(pivots)
    stats = SolverStats(weight=m, unknowns=len(unknowns), equations=len(rows), rank=rank)
    logger.debug("solve weight %d: %d equations, %d unknowns, rank %d", m, len(rows), len(unknowns), rank)
    if rank < len(unknowns):
        raise SolverError(f"rank {rank} below {len(unknowns)} unknowns", weight=m)

    inverse = A.extract(list(pivots), list(range(len(unknowns)))).inv()
    rhs = [rows[i][1] for i in pivots]
    solution: Dict[Word, PadicNumber] = {}
    for j, w in enumerate(unknowns):
        total = None
        for i, b in enumerate(rhs):
            entry = inverse[j, i]
            if entry == 0:
                continue
            term = b * Fraction(int(entry.p), int(entry.q))
            total = term if total is None else total + term
        solution[w] = total

    chosen = set(pivots)
    for i, (terms, b) in enumerate(rows):
        if i in chosen:
            continue
        lhs = None
        for w, c in terms.items():
            term = solution[w] * c
            lhs = term if lhs is None else lhs + term
        if not (lhs - b).is_zero:
            raise SolverError(f"equation {i} not satisfied at precision", weight=m)
    return solution, stats


def compute_associator(
    p: int,
    precision: int,
    weight_cap: int,
    degree_cap: Optional[int] = None,
) -> Associator:
    """The group-like Frobenius-fixed series, solved weight by weight."""
    if not is_odd_prime(p):
        raise ConfigError("p must be an odd prime")
    if weight_cap < 0 or weight_cap > MAX_SOLVER_WEIGHT:
        raise ConfigError(f"weight cap must lie in [0, {MAX_SOLVER_WEIGHT}]")
    if precision < 1:
        raise ConfigError("precision must be >= 1")

    gauge = checked_gauge(p, weight_cap)
    gauge_degree = gauge.constant.degree_cap
    working = precision + SOLVER_GUARD_DIGITS
    zero = PadicNumber.zero(p, working)
    phi: Dict[Word, PadicNumber] = {EMPTY: PadicNumber.one(p, working)}
    stats: List[SolverStats] = []
    for m in range(1, weight_cap + 1):
        unknowns = DEFAULT.words(m)
        if m == 1:
            # (1 - p) c = 0 for both letters
            phi.update({w: zero for w in unknowns})
            continue
        pin = Word(letters="0" * (m - 1) + "1")
        rows = _shuffle_rows(m, phi) + _stuffle_rows(m, phi) + _regularization_rows(m, zero)
        pin_value = frobenius_pin(gauge, m, p, working)
        if not pin_value.agrees_with(depth_one_zeta(m, p, working)):
            raise SolverError("Frobenius pin disagrees with the Kubota-Leopoldt value", weight=m)
        rows.append(({pin: Fraction(1)}, pin_value))
        solution, stat = _solve_weight(m, rows, unknowns)
        phi.update(solution)
        stats.append(stat)

    series = NCSeries(
        alphabet=DEFAULT,
        weight_cap=weight_cap,
        coeffs={w: c.truncate(precision) for w, c in phi.items()},
    )
    assoc = Associator(
        prime=p,
        precision=precision,
        weight_cap=weight_cap,
        degree_cap=degree_cap if degree_cap is not None else gauge_degree,
        series=series,
        stats=stats,
    )
    validate_associator(assoc)
    logger.info("associator p=%d N=%d W=%d solved", p, precision, weight_cap)
    return assoc


def validate_associator(assoc: Associator) -> None:
    """Hard checks: low-weight vanishing, group-likeness, route through the disc of 1."""
    for w, c in assoc.series.coeffs.items():
        if 1 <= len(w) <= 2 and not c.is_zero:
            raise SolverError(f"coefficient of {w.letters!r} does not vanish", weight=len(w))
    report = is_grouplike(assoc.series)
    if not report.is_zero:
        raise SolverError(f"not group-like at {report.worst_pair}", weight=assoc.weight_cap)
    if assoc.weight_cap >= 1:
        p, N = assoc.prime, assoc.precision
        z = PadicNumber.from_rational(1 + p, p, N)
        ctx = PathContext(associator=assoc)
        value, _ = coleman_iterint(Basepoint.tangent_at_zero(), Basepoint.at(z), Word(letters="0"), ctx)
        if not value.agrees_with(iwasawa_log(z)):
            raise SolverError("e0 through the disc of 1 disagrees with log", weight=1)


def pmzv(word: Union[Word, str, Sequence[int]], assoc: Associator) -> PadicNumber:
    if isinstance(word, str):
        word = Word(letters=word)
    elif not isinstance(word, Word):
        word = index_to_word(tuple(word), regularized=True)
    if len(word) > assoc.weight_cap:
        raise WeightOverflowError(f"weight {len(word)} beyond cap {assoc.weight_cap}")
    return pair(word, assoc.series)


# ── Paths between basepoints ─────────────────────────────────

class PathContext:
    """Associator plus lazily built local solutions at 0 and at 1."""

    def __init__(self, associator: Associator, threads: int = 1):
        self.associator = associator
        self.threads = threads
        self._tables: Dict[int, LiTable] = {}

    @property
    def prime(self) -> int:
        return self.associator.prime

    @property
    def precision(self) -> int:
        return self.associator.precision

    def table(self, disc: int) -> LiTable:
        if disc not in self._tables:
            W, D = self.associator.weight_cap, self.associator.degree_cap
            if disc == 0:
                self._tables[0] = build_li_table(W, D, threads=self.threads)
            else:
                self._tables[1] = local_table_at_one(W, D, threads=self.threads)
        return self._tables[disc]

    def remember(self, disc: int, table: LiTable) -> None:
        """Keep an escalated table for later evaluations in the same disc."""
        if table.at_one != (disc == 1):
            raise UnsupportedBasepointError(f"table for the wrong disc offered for disc {disc}")
        current = self._tables.get(disc)
        if current is None or table.degree_cap > current.degree_cap:
            self._tables[disc] = table

    def evaluate(self, disc: int, z: PadicNumber) -> NCSeries:
        """Every local table entry at z (a point of the disc of 0, or s = 1 - t)."""
        series, table = eval_table(self.table(disc), z, self.precision)
        self.remember(disc, table)
        return series

    def unit(self) -> NCSeries:
        return NCSeries.unit(self.associator.weight_cap, one=PadicNumber.one(self.prime, self.precision))

    def local_solution(self, b: Basepoint) -> NCSeries:
        """Path from the tangential basepoint of b's disc to b."""
        if b.kind != "point":
            return self.unit()
        disc = b.disc
        return self.evaluate(disc, b.point if disc == 0 else 1 - b.point)


def path_series(b: Basepoint, c: Basepoint, ctx: PathContext) -> Tuple[NCSeries, Route]:
    """Series of the path b -> c; nc_mul(S, T) runs T first."""
    phi = ctx.associator.series
    Fb = ctx.local_solution(b)
    Fc = ctx.local_solution(c)
    if b.disc == c.disc:
        return nc_mul(Fc, nc_inverse(Fb)), "samedisc"
    if b.disc == 0:
        return nc_mul(Fc, nc_mul(phi, nc_inverse(Fb))), "disc1"
    return nc_mul(Fc, nc_mul(nc_inverse(phi), nc_inverse(Fb))), "reverse"


def coleman_iterint(
    b: Basepoint,
    c: Basepoint,
    w: Union[Word, ShuffleElement],
    ctx: PathContext,
) -> Tuple[PadicNumber, Route]:
    """The p-adic iterated integral from b to c, with the route taken."""
    f = ShuffleElement.of(w) if isinstance(w, Word) else w
    if f.max_weight > ctx.associator.weight_cap:
        raise WeightOverflowError(
            f"weight {f.max_weight} beyond cap {ctx.associator.weight_cap}"
        )
    try:
        b_disc, c_disc = b.disc, c.disc
    except DiscError as exc:
        raise UnsupportedBasepointError(str(exc)) from exc

    if b.kind == "tangent0" and c.kind == "tangent1":
        return pair(f, ctx.associator.series), "af"
    if b.kind == "tangent0" and c.kind == "point" and c_disc == 0 and isinstance(w, Word):
        value, table = eval_li(ctx.table(0), w, c.point, ctx.precision)
        ctx.remember(0, table)
        return value, "disc0"
    if b.kind == "tangent0" and c_disc == 1:
        path = nc_mul(ctx.local_solution(c), ctx.associator.series)
        return pair(f, path), "disc1"
    path, route = path_series(b, c, ctx)
    if b_disc == c_disc and b.kind == "tangent0":
        route = "disc0"
    return pair(f, path), route


# ── Formal periods ───────────────────────────────────────────

class FormalPeriod(BaseModel):
    """The symbol I_b^c(f): the functional f on paths from b to c."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lower: Basepoint
    upper: Basepoint
    functional: ShuffleElement

    @classmethod
    def mzv(cls, w: Union[Word, str]) -> "FormalPeriod":
        return cls(
            lower=Basepoint.tangent_at_zero(),
            upper=Basepoint.tangent_at_one(),
            functional=ShuffleElement.of(w),
        )

    @property
    def name(self) -> str:
        body = " + ".join(
            (f"{c}*" if c != 1 else "") + (w.letters or "()") for w, c in self.functional.sorted_terms()
        )
        return f"I_{{{self.lower.label()}}}^{{{self.upper.label()}}}({body or '0'})"


def per_af(sym: FormalPeriod, ctx: PathContext) -> PadicNumber:
    """Evaluate the symbol at the Frobenius-fixed path."""
    if sym.lower.kind == "tangent0" and sym.upper.kind == "tangent1":
        return pair(sym.functional, ctx.associator.series)
    value, _ = coleman_iterint(sym.lower, sym.upper, sym.functional, ctx)
    return value


def per_cl(w: Union[Word, str, ShuffleElement], assoc: Associator) -> PadicNumber:
    """Pair w with the loop: the fixed path composed with the inverse Hodge path."""
    if isinstance(w, str):
        w = Word(letters=w)
    top = max(
        [assoc.precision] + [c.rel_precision for c in assoc.series.coeffs.values()]
    )
    hodge = NCSeries.unit(assoc.weight_cap, one=PadicNumber.one(assoc.prime, top))
    loop = nc_mul(assoc.series, nc_inverse(hodge))
    return pair(w, loop)
