"""
Multiple polylogarithms at the tangential basepoint 1 at 0.

Table entries are LogPolySeries: polynomials in a formal symbol l (= log t)
whose coefficients are exact rational power series in t truncated at t^D.
With theta = t d/dt the recursion is

    theta Li_{0 w}  = Li_w
    theta Li_{a w}  = t/(a - t) * Li_w        (letter at puncture a != 0)

with every integration constant zero, so Li_{0^k} = l^k / k!.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict
from sympy.polys.domains import QQ
from sympy.polys.ring_series import (
    mul_xin,
    pow_xin,
    rs_diff,
    rs_integrate,
    rs_mul,
    rs_series_inversion,
    rs_trunc,
)
from sympy.polys.rings import PolyElement, ring

from backend.errors import (
    DiscError,
    InsufficientTermsError,
    NotInvertibleError,
    SeriesMismatchError,
    UnsupportedBasepointError,
    WeightOverflowError,
)
from backend.nc_series import NCSeries
from backend.padic_core import (
    PadicNumber,
    floor_log,
    iwasawa_log,
    rational_valuation,
    valuation_of,
)
from backend.shuffle_words import DEFAULT, EMPTY, Alphabet, Word
from config import MAX_DEGREE

logger = logging.getLogger(__name__)

Coeffs = Tuple[Fraction, ...]

# t-series kernels run in QQ[t]; parts are stored densely as Fraction tuples
T_RING, T = ring("t", QQ)


def _poly(row: Sequence[Fraction]) -> PolyElement:
    return T_RING.from_dict(
        {(n,): QQ(c.numerator, c.denominator) for n, c in enumerate(row) if c}
    )


def _row(poly: PolyElement, degree_cap: int) -> Coeffs:
    row = [Fraction(0)] * (degree_cap + 1)
    for (n,), c in poly.items():
        if n <= degree_cap:
            row[n] = Fraction(int(c.numerator), int(c.denominator))
    return tuple(row)


def _rows(parts: Dict[int, PolyElement], degree_cap: int) -> Dict[int, Coeffs]:
    return {k: _row(f, degree_cap) for k, f in parts.items()}


# ── Log-polynomial series ring ───────────────────────────────

class LogPolySeries(BaseModel):
    """sum_k l^k * parts[k](t), each part a t-series truncated at t^degree_cap."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    degree_cap: int
    parts: Dict[int, Coeffs] = {}

    @classmethod
    def build(cls, degree_cap: int, parts: Mapping[int, Sequence[Fraction]]) -> "LogPolySeries":
        clean: Dict[int, Coeffs] = {}
        for k, coeffs in parts.items():
            row = tuple(Fraction(c) for c in coeffs[: degree_cap + 1])
            row = row + (Fraction(0),) * (degree_cap + 1 - len(row))
            if any(row):
                clean[k] = row
        return cls(degree_cap=degree_cap, parts=clean)

    @classmethod
    def constant(cls, c: Union[int, Fraction], degree_cap: int) -> "LogPolySeries":
        return cls.build(degree_cap, {0: [Fraction(c)]})

    @classmethod
    def log_power(cls, k: int, degree_cap: int) -> "LogPolySeries":
        return cls.build(degree_cap, {k: [Fraction(1)]})

    @classmethod
    def from_t_coeffs(cls, coeffs: Sequence[Fraction], degree_cap: int) -> "LogPolySeries":
        return cls.build(degree_cap, {0: coeffs})

    @property
    def is_zero(self) -> bool:
        return not self.parts

    @property
    def log_degree(self) -> int:
        return max(self.parts, default=0)

    def part(self, k: int) -> Coeffs:
        return self.parts.get(k, (Fraction(0),) * (self.degree_cap + 1))

    def coefficient(self, k: int, n: int) -> Fraction:
        return self.part(k)[n] if n <= self.degree_cap else Fraction(0)

    def is_log_free(self) -> bool:
        return all(k == 0 for k in self.parts)

    # ── Ring structure ───────────────────────────────────────

    def _lift(self, other) -> "LogPolySeries":
        if isinstance(other, LogPolySeries):
            if other.degree_cap != self.degree_cap:
                raise SeriesMismatchError(
                    f"degree cap {self.degree_cap} vs {other.degree_cap}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return LogPolySeries.constant(other, self.degree_cap)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        keys = set(self.parts) | set(other.parts)
        return LogPolySeries.build(
            self.degree_cap,
            {k: [a + b for a, b in zip(self.part(k), other.part(k))] for k in keys},
        )

    __radd__ = __add__

    def __neg__(self) -> "LogPolySeries":
        return self.scale(-1)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def scale(self, c: Union[int, Fraction]) -> "LogPolySeries":
        c = Fraction(c)
        return LogPolySeries.build(
            self.degree_cap, {k: [c * x for x in row] for k, row in self.parts.items()}
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._lift(other)
        if other is NotImplemented:
            return other
        D = self.degree_cap
        right = {j: _poly(b) for j, b in other.parts.items()}
        out: Dict[int, PolyElement] = {}
        for i, a in self.parts.items():
            left = _poly(a)
            for j, b in right.items():
                out[i + j] = out.get(i + j, T_RING.zero) + rs_mul(left, b, T, D + 1)
        return LogPolySeries.build(D, _rows(out, D))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return self * (1 / other)

    def __rtruediv__(self, other):
        """Inverse of an l-free series with nonzero constant term."""
        if not self.is_log_free() or not self.coefficient(0, 0):
            raise NotInvertibleError("only l-free series with a unit constant invert")
        D = self.degree_cap
        inv = rs_series_inversion(_poly(self.part(0)), T, D + 1)
        return LogPolySeries.from_t_coeffs(_row(inv, D), D) * Fraction(other)

    def to_json(self) -> Dict[str, List[str]]:
        return {
            str(k): [f"{c.numerator}/{c.denominator}" for c in row]
            for k, row in sorted(self.parts.items())
        }


def theta(f: LogPolySeries) -> LogPolySeries:
    """t d/dt, with theta(l) = 1."""
    D = f.degree_cap
    out: Dict[int, PolyElement] = {}
    for k, row in f.parts.items():
        g = _poly(row)
        out[k] = out.get(k, T_RING.zero) + mul_xin(rs_diff(g, T), 0, 1)
        if k:
            out[k - 1] = out.get(k - 1, T_RING.zero) + g * k
    return LogPolySeries.build(D, _rows(out, D))


def _divide_by_index(g: PolyElement) -> PolyElement:
    """t^n -> t^n / n on a series without constant term."""
    return rs_integrate(mul_xin(g, 0, -1), T)


def theta_inverse(f: LogPolySeries) -> LogPolySeries:
    """The primitive F with theta F = f and no l-free constant term."""
    D = f.degree_cap
    out: Dict[int, PolyElement] = {}
    for k, row in f.parts.items():
        if row[0]:
            out[k + 1] = out.get(k + 1, T_RING.zero) + _poly([row[0] / (k + 1)])
        # theta^-1 (l^k g) = sum_j (-1)^j k!/(k-j)! l^(k-j) g_(j+1), g_i = t^n/n^i termwise
        g = _poly((Fraction(0),) + tuple(row[1:]))
        falling = 1
        for j in range(k + 1):
            g = _divide_by_index(g)
            out[k - j] = out.get(k - j, T_RING.zero) + g * ((-1) ** j * falling)
            falling *= k - j
    return LogPolySeries.build(D, _rows(out, D))


def substitute_power(f: LogPolySeries, p: int) -> LogPolySeries:
    """t -> t^p, l -> p*l, truncated at the same t-degree."""
    D = f.degree_cap
    out = {
        k: rs_trunc(pow_xin(_poly(row), 0, p), T, D + 1) * p ** k
        for k, row in f.parts.items()
    }
    return LogPolySeries.build(D, _rows(out, D))


def _kernel(a: Fraction, D: int) -> LogPolySeries:
    """t/(a - t) = sum_{n>=1} t^n / a^n."""
    return LogPolySeries.from_t_coeffs(
        [Fraction(0)] + [1 / a ** n for n in range(1, D + 1)], D
    )


# ── Tables ───────────────────────────────────────────────────

class LiTable(BaseModel):
    """Entries in t around 0, or in s = 1 - t around 1 when `at_one` is set."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    weight_cap: int
    degree_cap: int
    alphabet: Alphabet = DEFAULT
    at_one: bool = False
    entries: Dict[Word, LogPolySeries]

    def get(self, w: Union[Word, str]) -> LogPolySeries:
        if isinstance(w, str):
            w = Word(letters=w)
        if len(w) > self.weight_cap:
            raise WeightOverflowError(
                f"word {w.letters!r} beyond table weight {self.weight_cap}"
            )
        self.alphabet.check(w)
        return self.entries[w]

    def series(self) -> NCSeries:
        """Generating series sum_w Li_w * w over the log-poly ring."""
        return NCSeries(
            alphabet=self.alphabet,
            weight_cap=self.weight_cap,
            coeffs={w: f for w, f in self.entries.items() if not f.is_zero or not w.letters},
        )


def build_li_table(
    weight_cap: int,
    degree_cap: int,
    alphabet: Alphabet = DEFAULT,
    threads: int = 1,
) -> LiTable:
    if weight_cap < 0 or degree_cap < 1:
        raise ValueError("need weight_cap >= 0 and degree_cap >= 1")
    if degree_cap > MAX_DEGREE:
        raise WeightOverflowError(f"degree cap {degree_cap} above {MAX_DEGREE}")
    if "0" not in alphabet.letters or alphabet.puncture("0") != 0:
        raise UnsupportedBasepointError("the alphabet needs letter '0' at puncture 0")

    D = degree_cap
    kernels = {
        c: _kernel(alphabet.puncture(c), D) for c in alphabet.letters if c != "0"
    }
    entries: Dict[Word, LogPolySeries] = {EMPTY: LogPolySeries.constant(1, D)}

    def integrate(w: Word) -> Tuple[Word, LogPolySeries]:
        head, tail = w.letters[0], Word(letters=w.letters[1:])
        source = entries[tail]
        if head != "0":
            source = kernels[head] * source
        return w, theta_inverse(source)

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        for m in range(1, weight_cap + 1):
            layer = list(pool.map(integrate, alphabet.words(m)))
            entries.update(layer)
            logger.debug("build_li_table: weight %d done (%d words, D=%d)", m, len(layer), D)

    return LiTable(weight_cap=weight_cap, degree_cap=D, alphabet=alphabet, entries=entries)


def swap_word(w: Word) -> Word:
    return Word(letters=w.letters.translate(str.maketrans("01", "10")))


def transport_to_one(table: LiTable) -> LiTable:
    """Entry w becomes (-1)^|w| * Li_{swap(w)}: the solution at -1 at 1 in s = 1 - t."""
    if set(table.alphabet.letters) != {"0", "1"}:
        raise UnsupportedBasepointError("transport to 1 needs the alphabet {0, 1}")
    entries = {
        w: (table.entries[swap_word(w)] if len(w) % 2 == 0 else -table.entries[swap_word(w)])
        for w in table.entries
    }
    return LiTable(
        weight_cap=table.weight_cap,
        degree_cap=table.degree_cap,
        alphabet=table.alphabet,
        at_one=not table.at_one,
        entries=entries,
    )


def local_table_at_one(weight_cap: int, degree_cap: int, threads: int = 1) -> LiTable:
    return transport_to_one(build_li_table(weight_cap, degree_cap, threads=threads))


def rebuild_table(table: LiTable, degree_cap: int, threads: int = 1) -> LiTable:
    """The same local table at another t-degree, keeping the transport to 1."""
    fresh = build_li_table(table.weight_cap, degree_cap, table.alphabet, threads)
    return transport_to_one(fresh) if table.at_one else fresh


def check_differential(table: LiTable) -> List[str]:
    """Words whose entry fails the defining differential equation exactly."""
    failures: List[str] = []
    D = table.degree_cap
    t = LogPolySeries.from_t_coeffs([Fraction(0), Fraction(1)], D)
    for w, f in table.entries.items():
        if not w.letters:
            continue
        head, tail = w.letters[0], table.entries[Word(letters=w.letters[1:])]
        if head == "0":
            ok = theta(f) == tail
        else:
            a = table.alphabet.puncture(head)
            # (a - t) theta F = t * source
            ok = (theta(f) * (t * -1 + a)) == t * tail
        if not ok:
            failures.append(w.letters)
    return failures


def dump_table(table: LiTable) -> Dict[str, Dict[str, List[str]]]:
    return {
        w.letters: f.to_json()
        for w, f in sorted(table.entries.items(), key=lambda it: table.alphabet.sort_key(it[0]))
    }


# ── Evaluation in the disc of 0 ──────────────────────────────

def tail_bound(degree_cap: int, vz: int, weight: int, p: int) -> int:
    """Lower bound on v(term_n) over n > degree_cap."""
    shift = valuation_of(math.factorial(weight), p)

    def f(n: int) -> int:
        return n * vz - weight * floor_log(n, p) - shift

    start = degree_cap + 1
    best = f(start)
    power = p ** (floor_log(start, p) + 1)
    while power * vz - weight * floor_log(power, p) - shift < best:
        best = min(best, f(power))
        power *= p
    return best


def degree_for(target: int, vz: int, weight: int, p: int, start: int) -> int:
    D = max(start, 1)
    while tail_bound(D, vz, weight, p) < target:
        D *= 2
        if D > MAX_DEGREE:
            raise InsufficientTermsError(
                f"degree above {MAX_DEGREE} needed for O({p}^{target})"
            )
    return D


def _check_point(z: PadicNumber, alphabet: Alphabet) -> None:
    if z.is_zero:
        raise DiscError("z is zero at precision")
    if z.valuation < 1:
        raise DiscError(f"v(z) = {z.valuation}: outside the residue disc of 0")
    for c in alphabet.letters:
        a = alphabet.puncture(c)
        if a and rational_valuation(a, z.prime) != 0:
            raise DiscError(f"puncture {a} is not a {z.prime}-adic unit")


def evaluate_series(f: LogPolySeries, z: PadicNumber, log_z: PadicNumber, abs_cap: int) -> PadicNumber:
    """f(z) with l = log_z, each l-part summed exactly then reduced mod p^abs_cap."""
    p = z.prime
    x = z.lift()
    total: Optional[PadicNumber] = None
    for k, row in sorted(f.parts.items()):
        acc = Fraction(0)
        power = Fraction(1)
        for c in row:
            if c:
                acc += c * power
            power *= x
        part = PadicNumber.from_rational_abs(acc, p, abs_cap)
        if k:
            part = part * log_z ** k
        total = part if total is None else total + part
    if total is None:
        return PadicNumber.zero(p, abs_cap)
    return total.truncate(abs_cap)


def _arith_bound(z: PadicNumber, degree_cap: int, weight: int) -> int:
    p = z.prime
    return min(
        z.absolute_precision + (n - 1) * z.valuation - weight * floor_log(n, p)
        for n in range(1, degree_cap + 1)
    )


def eval_li(
    table: LiTable,
    w: Union[Word, str],
    z: PadicNumber,
    precision: Optional[int] = None,
) -> Tuple[PadicNumber, LiTable]:
    """Li_w(z) to O(p^precision) absolute.

    Returns ``(value, table)``. When the tail bound of `table` falls short
    of the requested precision the table is rebuilt at a larger degree
    (keeping its transport to 1) and the rebuilt table is returned so the
    caller can reuse it; otherwise `table` itself comes back.
    """
    if isinstance(w, str):
        w = Word(letters=w)
    _check_point(z, table.alphabet)
    p = z.prime
    m = len(w)
    target = z.rel_precision if precision is None else precision
    D = degree_for(target, z.valuation, m, p, table.degree_cap)
    if D > table.degree_cap:
        logger.info("eval_li: raising degree %d -> %d for O(%d^%d)", table.degree_cap, D, p, target)
        table = rebuild_table(table, D)
    f = table.get(w)
    cap = min(target, tail_bound(D, z.valuation, m, p), _arith_bound(z, D, m))
    log_z = iwasawa_log(z)
    return evaluate_series(f, z, log_z, cap), table


def nested_sum_oracle(
    index: Sequence[int],
    z: PadicNumber,
    terms: int,
    precision: Optional[int] = None,
) -> PadicNumber:
    """sum over n1 > ... > nr >= 1, n1 <= terms, of z^n1 / (n1^k1 ... nr^kr)."""
    if z.is_zero or z.valuation < 1:
        raise DiscError("the nested sum needs v(z) >= 1")
    p = z.prime
    weight = sum(index)
    target = z.rel_precision if precision is None else precision
    reach = tail_bound(terms, z.valuation, weight, p)
    if reach < target:
        raise InsufficientTermsError(
            f"{terms} terms reach only O({p}^{reach}), asked O({p}^{target})"
        )
    r = len(index)
    # inner[j] = sum over n > n_{j+1} > ... > n_r >= 1 of prod 1/n_i^k_i, for the current n
    inner = [Fraction(0)] * r
    x = z.lift()
    total = Fraction(0)
    power = Fraction(1)
    for n in range(1, terms + 1):
        power *= x
        head = Fraction(1) if r == 1 else inner[1]
        total += power * head / Fraction(n) ** index[0]
        # fold n in, shallowest first so each sum sees only smaller n
        for j in range(1, r):
            below = Fraction(1) if j == r - 1 else inner[j + 1]
            inner[j] += below / Fraction(n) ** index[j]
    cap = min(target, _arith_bound(z, terms, weight))
    return PadicNumber.from_rational_abs(total, p, cap)


def eval_table(
    table: LiTable,
    z: PadicNumber,
    precision: Optional[int] = None,
) -> Tuple[NCSeries, LiTable]:
    """Every entry of the table at z, as a series with p-adic coefficients."""
    _check_point(z, table.alphabet)
    p = z.prime
    target = z.rel_precision if precision is None else precision
    D = degree_for(target, z.valuation, table.weight_cap, p, table.degree_cap)
    if D > table.degree_cap:
        logger.info("eval_table: raising degree %d -> %d for O(%d^%d)", table.degree_cap, D, p, target)
        table = rebuild_table(table, D)
    log_z = iwasawa_log(z)
    coeffs = {}
    for w, f in table.entries.items():
        m = len(w)
        cap = min(target, tail_bound(D, z.valuation, m, p), _arith_bound(z, D, m))
        coeffs[w] = evaluate_series(f, z, log_z, cap)
    series = NCSeries(alphabet=table.alphabet, weight_cap=table.weight_cap, coeffs=coeffs)
    return series, table
