"""
Words on the puncture alphabet and the shuffle Hopf algebra they span.

A letter id names a puncture a; letter "0" stands for dt/t and a letter at
a puncture a != 0 for dt/(a - t). In a path series the first letter of a
word is the final integration step.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_validator

from backend.errors import AlphabetMismatchError, WordSyntaxError
from config import DEFAULT_ALPHABET, DEFAULT_PUNCTURES


class Alphabet(BaseModel):
    """Ordered letter ids, each attached to a rational puncture."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    letters: str = DEFAULT_ALPHABET
    punctures: Tuple[Fraction, ...] = tuple(
        Fraction(DEFAULT_PUNCTURES[c]) for c in DEFAULT_ALPHABET
    )

    @field_validator("letters")
    @classmethod
    def _distinct(cls, v: str) -> str:
        if len(set(v)) != len(v):
            raise ValueError("letter ids must be distinct")
        if len(v) > 16:
            raise ValueError("at most 16 letters")
        return v

    @classmethod
    def from_punctures(cls, punctures: Mapping[str, Union[int, Fraction]]) -> "Alphabet":
        letters = "".join(punctures)
        values = tuple(Fraction(punctures[c]) for c in letters)
        if len(set(values)) != len(values):
            raise ValueError("punctures must be distinct")
        return cls(letters=letters, punctures=values)

    def puncture(self, letter: str) -> Fraction:
        return self.punctures[self.letters.index(letter)]

    def sort_key(self, word: "Word") -> Tuple[int, Tuple[int, ...]]:
        return len(word), tuple(self.letters.index(c) for c in word.letters)

    def words(self, weight: int) -> List["Word"]:
        """All words of exactly this weight, in canonical order."""
        layer = [""]
        for _ in range(weight):
            layer = [w + c for w in layer for c in self.letters]
        return [Word(letters=w) for w in layer]

    def words_up_to(self, weight: int) -> List["Word"]:
        return [w for m in range(weight + 1) for w in self.words(m)]

    def check(self, *words: "Word") -> None:
        for w in words:
            for c in w.letters:
                if c not in self.letters:
                    raise AlphabetMismatchError(
                        f"letter {c!r} not in alphabet {self.letters!r}"
                    )


DEFAULT = Alphabet()


class Word(BaseModel):
    """Finite sequence of single-character letter ids."""

    model_config = ConfigDict(frozen=True)

    letters: str = ""

    @property
    def weight(self) -> int:
        return len(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __add__(self, other: "Word") -> "Word":
        return Word(letters=self.letters + other.letters)

    def __str__(self) -> str:
        return format_word(self)


EMPTY = Word()


def letter(c: str) -> Word:
    return Word(letters=c)


class ShuffleElement(BaseModel):
    """Rational linear combination of words; zero coefficients are never stored."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    terms: Dict[Word, Fraction] = {}

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[Word, Union[int, Fraction]]]) -> "ShuffleElement":
        acc: Dict[Word, Fraction] = {}
        for w, c in terms:
            acc[w] = acc.get(w, Fraction(0)) + Fraction(c)
        return cls(terms={w: c for w, c in acc.items() if c != 0})

    @classmethod
    def of(cls, word: Union[Word, str], coeff: Union[int, Fraction] = 1) -> "ShuffleElement":
        if isinstance(word, str):
            word = Word(letters=word)
        return cls.from_terms([(word, coeff)])

    @property
    def max_weight(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def homogeneous(self, weight: int) -> "ShuffleElement":
        return ShuffleElement(terms={w: c for w, c in self.terms.items() if len(w) == weight})

    def mass(self) -> Fraction:
        return sum(self.terms.values(), Fraction(0))

    def __add__(self, other: "ShuffleElement") -> "ShuffleElement":
        return ShuffleElement.from_terms(list(self.terms.items()) + list(other.terms.items()))

    def __sub__(self, other: "ShuffleElement") -> "ShuffleElement":
        return self + other.scale(-1)

    def scale(self, c: Union[int, Fraction]) -> "ShuffleElement":
        return ShuffleElement.from_terms((w, c * x) for w, x in self.terms.items())

    def __mul__(self, other):
        """Shuffle product (bilinear extension) or scalar multiple."""
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out: List[Tuple[Word, Fraction]] = []
        for u, a in self.terms.items():
            for v, b in other.terms.items():
                for w, n in shuffle(u, v).terms.items():
                    out.append((w, a * b * n))
        return ShuffleElement.from_terms(out)

    __rmul__ = scale

    def sorted_terms(self, alphabet: Alphabet = DEFAULT) -> List[Tuple[Word, Fraction]]:
        return sorted(self.terms.items(), key=lambda item: alphabet.sort_key(item[0]))

    def to_json(self, alphabet: Alphabet = DEFAULT) -> Dict[str, object]:
        return {
            "terms": [
                {"word": w.letters, "num": c.numerator, "den": c.denominator}
                for w, c in self.sorted_terms(alphabet)
            ]
        }


# ── Shuffle Hopf algebra ─────────────────────────────────────

@lru_cache(maxsize=None)
def _shuffle_counts(u: str, v: str) -> Tuple[Tuple[str, int], ...]:
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    acc: Dict[str, int] = {}
    for w, n in _shuffle_counts(u[1:], v):
        acc[u[0] + w] = acc.get(u[0] + w, 0) + n
    for w, n in _shuffle_counts(u, v[1:]):
        acc[v[0] + w] = acc.get(v[0] + w, 0) + n
    return tuple(sorted(acc.items()))


def shuffle(u: Word, v: Word, alphabet: Alphabet = None) -> ShuffleElement:
    """Sum of all interleavings of u and v."""
    if alphabet is not None:
        alphabet.check(u, v)
    return ShuffleElement(
        terms={Word(letters=w): Fraction(n) for w, n in _shuffle_counts(u.letters, v.letters)}
    )


def shuffle_many(words: Sequence[Word]) -> ShuffleElement:
    result = ShuffleElement.of(EMPTY)
    for w in words:
        result = result * ShuffleElement.of(w)
    return result


def deconcat(w: Word) -> List[Tuple[Word, Word]]:
    """All prefix/suffix splittings, shortest prefix first."""
    s = w.letters
    return [(Word(letters=s[:i]), Word(letters=s[i:])) for i in range(len(s) + 1)]


def antipode(w: Word) -> ShuffleElement:
    return ShuffleElement.of(Word(letters=w.letters[::-1]), (-1) ** len(w))


def antipode_element(f: ShuffleElement) -> ShuffleElement:
    return ShuffleElement.from_terms(
        (Word(letters=w.letters[::-1]), c * (-1) ** len(w)) for w, c in f.terms.items()
    )


# ── Multi-indices ────────────────────────────────────────────

def index_to_word(index: Sequence[int], regularized: bool = False) -> Word:
    """(k1..kr) -> e0^(k1-1) e1 ... e0^(kr-1) e1."""
    if len(index) < 1:
        raise ValueError("multi-index must have at least one entry")
    for k in index:
        if k < 1:
            raise ValueError(f"nonpositive entry {k} in multi-index")
    if index[0] < 2 and not regularized:
        raise ValueError("first entry must be >= 2 unless regularized")
    return Word(letters="".join("0" * (k - 1) + "1" for k in index))


def word_to_index(w: Word) -> Tuple[int, ...]:
    if not w.letters.endswith("1") or set(w.letters) - {"0", "1"}:
        raise ValueError(f"word {w.letters!r} is not e1-terminated over {{0,1}}")
    return tuple(len(block) + 1 for block in w.letters.split("1")[:-1])


def is_convergent(w: Word) -> bool:
    """Starts with e0 and ends with e1 (finite iterated integral from 0 to 1)."""
    return w.letters.startswith("0") and w.letters.endswith("1")


def stuffle(k: Tuple[int, ...], l: Tuple[int, ...]) -> Dict[Tuple[int, ...], int]:
    """Harmonic product of multi-indices (relation generator only)."""
    return dict(_stuffle(tuple(k), tuple(l)))


@lru_cache(maxsize=None)
def _stuffle(k: Tuple[int, ...], l: Tuple[int, ...]) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    if not k:
        return ((l, 1),)
    if not l:
        return ((k, 1),)
    acc: Dict[Tuple[int, ...], int] = {}
    for rest, n in _stuffle(k[1:], l):
        key = (k[0],) + rest
        acc[key] = acc.get(key, 0) + n
    for rest, n in _stuffle(k, l[1:]):
        key = (l[0],) + rest
        acc[key] = acc.get(key, 0) + n
    for rest, n in _stuffle(k[1:], l[1:]):
        key = (k[0] + l[0],) + rest
        acc[key] = acc.get(key, 0) + n
    return tuple(sorted(acc.items()))


# ── Text format ──────────────────────────────────────────────

def parse_word(s: str, alphabet: Alphabet = DEFAULT) -> Word:
    for i, c in enumerate(s):
        if c not in alphabet.letters:
            raise WordSyntaxError(f"unknown letter {c!r}", position=i)
    return Word(letters=s)


def format_word(w: Word) -> str:
    return w.letters
