"""
Weight-truncated noncommutative power series in the letters of an alphabet.

Coefficients live in any commutative ring whose elements support + - *
with each other and with int/Fraction scalars: Fraction, PadicNumber and
LogPolySeries are the three used here. A missing word means coefficient
zero; missing entries are skipped in every sum so no artificial zero ever
caps a p-adic precision.

Composition convention: nc_mul(S, T) is "path T first, then path S".
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, model_validator

from backend.errors import (
    NotInvertibleError,
    SeriesMismatchError,
    WeightOverflowError,
)
from backend.shuffle_words import (
    DEFAULT,
    EMPTY,
    Alphabet,
    ShuffleElement,
    Word,
    shuffle,
)

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]


class NCSeries(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alphabet: Alphabet = DEFAULT
    weight_cap: int
    coeffs: Dict[Word, Any]

    @model_validator(mode="after")
    def _check_words(self) -> "NCSeries":
        if self.weight_cap < 0:
            raise ValueError("weight_cap must be >= 0")
        if EMPTY not in self.coeffs:
            raise ValueError("the empty-word coefficient must be present")
        for w in self.coeffs:
            if len(w) > self.weight_cap:
                raise WeightOverflowError(
                    f"word {w.letters!r} exceeds weight cap {self.weight_cap}"
                )
        self.alphabet.check(*self.coeffs)
        return self

    # ── Construction ─────────────────────────────────────────

    @classmethod
    def unit(cls, weight_cap: int, alphabet: Alphabet = DEFAULT, one: Any = Fraction(1)) -> "NCSeries":
        return cls(alphabet=alphabet, weight_cap=weight_cap, coeffs={EMPTY: one})

    @classmethod
    def from_words(
        cls,
        terms: Mapping[str, Any],
        weight_cap: int,
        alphabet: Alphabet = DEFAULT,
    ) -> "NCSeries":
        """Build from string-keyed coefficients; the empty word defaults to 1."""
        coeffs: Dict[Word, Any] = {Word(letters=k): v for k, v in terms.items()}
        coeffs.setdefault(EMPTY, Fraction(1))
        return cls(alphabet=alphabet, weight_cap=weight_cap, coeffs=coeffs)

    # ── Access ───────────────────────────────────────────────

    @property
    def constant(self) -> Any:
        return self.coeffs[EMPTY]

    def coeff(self, w: Union[Word, str]) -> Optional[Any]:
        if isinstance(w, str):
            w = Word(letters=w)
        return self.coeffs.get(w)

    def zero(self) -> Any:
        return self.constant * 0

    def coeff_or_zero(self, w: Union[Word, str]) -> Any:
        c = self.coeff(w)
        return self.zero() if c is None else c

    def sorted_items(self) -> Iterable[Tuple[Word, Any]]:
        return sorted(self.coeffs.items(), key=lambda item: self.alphabet.sort_key(item[0]))

    def truncate(self, weight_cap: int) -> "NCSeries":
        if weight_cap > self.weight_cap:
            raise WeightOverflowError("truncation cannot raise the weight cap")
        return NCSeries(
            alphabet=self.alphabet,
            weight_cap=weight_cap,
            coeffs={w: c for w, c in self.coeffs.items() if len(w) <= weight_cap},
        )

    def map_coeffs(self, fn: Callable[[Any], Any]) -> "NCSeries":
        return NCSeries(
            alphabet=self.alphabet,
            weight_cap=self.weight_cap,
            coeffs={w: fn(c) for w, c in self.coeffs.items()},
        )

    def to_json(self) -> Dict[str, object]:
        return {
            "W": self.weight_cap,
            "alphabet": self.alphabet.letters,
            "coeffs": {w.letters: coeff_to_json(c) for w, c in self.sorted_items()},
        }


def coeff_to_json(c: Any) -> object:
    if isinstance(c, (int, Fraction)):
        c = Fraction(c)
        return f"{c.numerator}/{c.denominator}"
    return c.to_json()


def _scaled(c: Any, factor: Scalar) -> Any:
    return c if factor == 1 else c * factor


def _accumulate(acc: Dict[Word, Any], w: Word, value: Any) -> None:
    prev = acc.get(w)
    acc[w] = value if prev is None else prev + value


def _check_compatible(S: NCSeries, T: NCSeries) -> None:
    if S.alphabet != T.alphabet:
        raise SeriesMismatchError(
            f"alphabet {S.alphabet.letters!r} vs {T.alphabet.letters!r}"
        )
    if S.weight_cap != T.weight_cap:
        raise SeriesMismatchError(f"weight cap {S.weight_cap} vs {T.weight_cap}")


# ── Products ─────────────────────────────────────────────────

def nc_mul(S: NCSeries, T: NCSeries) -> NCSeries:
    """Concatenation product: coeff(w) = sum over w = uv of S(u) T(v)."""
    _check_compatible(S, T)
    W = S.weight_cap
    acc: Dict[Word, Any] = {}
    t_items = list(T.sorted_items())
    for u, a in S.sorted_items():
        room = W - len(u)
        for v, b in t_items:
            if len(v) > room:
                break
            _accumulate(acc, u + v, a * b)
    return NCSeries(alphabet=S.alphabet, weight_cap=W, coeffs=acc)


def nc_inverse(S: NCSeries) -> NCSeries:
    """Two-sided inverse, solved word by word in increasing weight."""
    c0 = S.constant
    if isinstance(c0, int):
        c0 = Fraction(c0)
    try:
        inv0 = 1 / c0
    except ZeroDivisionError as exc:
        raise NotInvertibleError("constant term is not invertible") from exc
    if inv0 is NotImplemented:
        raise NotInvertibleError(f"cannot invert constant of type {type(c0).__name__}")

    X: Dict[Word, Any] = {EMPTY: inv0}
    for w in S.alphabet.words_up_to(S.weight_cap)[1:]:
        total = None
        s = w.letters
        for i in range(1, len(s) + 1):
            a = S.coeffs.get(Word(letters=s[:i]))
            b = X.get(Word(letters=s[i:]))
            if a is None or b is None:
                continue
            term = a * b
            total = term if total is None else total + term
        if total is not None:
            X[w] = -(total * inv0)
    return NCSeries(alphabet=S.alphabet, weight_cap=S.weight_cap, coeffs=X)


def pair(f: Union[ShuffleElement, Word], S: NCSeries) -> Any:
    """Evaluate the coordinate function f on S."""
    if isinstance(f, Word):
        f = ShuffleElement.of(f)
    if f.max_weight > S.weight_cap:
        raise WeightOverflowError(
            f"weight {f.max_weight} beyond series cap {S.weight_cap}"
        )
    total = None
    for w, c in f.sorted_terms(S.alphabet):
        value = S.coeffs.get(w)
        if value is None:
            continue
        term = _scaled(value, c)
        total = term if total is None else total + term
    return S.zero() if total is None else total


# ── Group-like elements ──────────────────────────────────────

class GrouplikeReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    max_residual: Fraction
    worst_pair: Optional[Tuple[str, str]] = None
    checked: int = 0

    @property
    def is_zero(self) -> bool:
        return self.max_residual == 0


def residual_size(x: Any) -> Fraction:
    """Size of a deviation: |x| for rationals, p-adic norm, 0/1 otherwise."""
    if isinstance(x, (int, Fraction)):
        return abs(Fraction(x))
    if hasattr(x, "norm"):
        return x.norm()
    return Fraction(0) if x.is_zero else Fraction(1)


def is_grouplike(S: NCSeries) -> GrouplikeReport:
    W = S.weight_cap
    worst = residual_size(S.constant - 1)
    worst_pair: Optional[Tuple[str, str]] = ("", "") if worst else None
    checked = 1
    words = S.alphabet.words_up_to(W)[1:]
    for u in words:
        for v in words:
            if len(u) + len(v) > W:
                continue
            lhs = pair(shuffle(u, v), S)
            rhs = S.coeff_or_zero(u) * S.coeff_or_zero(v)
            r = residual_size(lhs - rhs)
            checked += 1
            if r > worst:
                worst, worst_pair = r, (u.letters, v.letters)
    logger.debug("is_grouplike: %d pairs, max residual %s", checked, worst)
    return GrouplikeReport(max_residual=worst, worst_pair=worst_pair, checked=checked)


# ── Letter actions ───────────────────────────────────────────

def scale_letters(S: NCSeries, factors: Mapping[str, Scalar]) -> NCSeries:
    """coeff(w) times the product of factors[letter] over the letters of w."""
    out: Dict[Word, Any] = {}
    for w, c in S.coeffs.items():
        factor = Fraction(1)
        for ch in w.letters:
            factor *= Fraction(factors.get(ch, 1))
        out[w] = _scaled(c, factor)
    return NCSeries(alphabet=S.alphabet, weight_cap=S.weight_cap, coeffs=out)


def antipode_series(S: NCSeries) -> NCSeries:
    """pair(w, result) = pair(antipode(w), S)."""
    out = {
        Word(letters=w.letters[::-1]): (c if len(w) % 2 == 0 else -c)
        for w, c in S.coeffs.items()
    }
    return NCSeries(alphabet=S.alphabet, weight_cap=S.weight_cap, coeffs=out)


def exp_letter(
    letter: str,
    weight_cap: int,
    scale: Scalar = 1,
    alphabet: Alphabet = DEFAULT,
) -> NCSeries:
    """exp(scale * letter) with rational coefficients."""
    coeffs: Dict[Word, Any] = {EMPTY: Fraction(1)}
    term = Fraction(1)
    for k in range(1, weight_cap + 1):
        term = term * Fraction(scale) / k
        if term:
            coeffs[Word(letters=letter * k)] = term
    return NCSeries(alphabet=alphabet, weight_cap=weight_cap, coeffs=coeffs)


def from_lie_letters(
    weights: Mapping[str, Scalar],
    weight_cap: int,
    alphabet: Alphabet = DEFAULT,
) -> NCSeries:
    """exp(sum_a weights[a] * a): coeff(w) = prod weights / |w|!."""
    coeffs: Dict[Word, Any] = {}
    for w in alphabet.words_up_to(weight_cap):
        c = Fraction(1, math.factorial(len(w)))
        for ch in w.letters:
            c *= Fraction(weights.get(ch, 0))
        if c or not w.letters:
            coeffs[w] = c
    return NCSeries(alphabet=alphabet, weight_cap=weight_cap, coeffs=coeffs)
