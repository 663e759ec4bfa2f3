"""
Capped relative-precision arithmetic in the p-adic field Q_p.

A nonzero value is p^valuation * unit, known modulo
p^(valuation + rel_precision). A value with no significant digit left is a
zero-at-precision carrying only its absolute precision.

Tail bounds used by the series below (v = valuation of the argument):
  log:  v((x)^n / n)  >= n*v - floor(log_p n)
  exp:  v(a^n / n!)   >= n*v - (n - 1)/(p - 1)
"""
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Dict, Union

from pydantic import BaseModel, ConfigDict, model_validator

from backend.errors import (
    PadicDomainError,
    PadicZeroDivisionError,
    PrimeMismatchError,
)

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


def valuation_of(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def rational_valuation(q: Rational, p: int) -> int:
    q = Fraction(q)
    return valuation_of(q.numerator, p) - valuation_of(q.denominator, p)


def floor_log(n: int, p: int) -> int:
    """Largest j with p^j <= n, for n >= 1."""
    j = 0
    power = p
    while power <= n:
        power *= p
        j += 1
    return j


def is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def parse_rational(text: str) -> Fraction:
    """Parse a decimal "a" or "a/b" string into an exact Fraction."""
    text = text.strip()
    if not text:
        raise ValueError("empty rational")
    num, _, den = text.partition("/")
    value = Fraction(int(num), int(den) if den else 1)
    return value


class PadicNumber(BaseModel):
    """Element of Q_p at capped relative precision."""

    model_config = ConfigDict(frozen=True)

    prime: int
    valuation: int
    unit: int
    rel_precision: int
    is_zero: bool = False

    @model_validator(mode="after")
    def _check_canonical(self) -> "PadicNumber":
        p = self.prime
        if self.is_zero:
            if self.unit != 0 or self.rel_precision != 0:
                raise ValueError("zero-at-precision carries unit 0 and rel_precision 0")
            return self
        if self.rel_precision < 1:
            raise ValueError("rel_precision must be >= 1")
        if self.unit % p == 0:
            raise ValueError("unit must be coprime to p")
        if not 0 < self.unit < p ** self.rel_precision:
            raise ValueError("unit must be reduced mod p^rel_precision")
        return self

    # ── Construction ─────────────────────────────────────────

    @classmethod
    def _raw(cls, p: int, v: int, unit: int, n: int, zero: bool = False) -> "PadicNumber":
        return cls.model_construct(
            prime=p, valuation=v, unit=unit, rel_precision=n, is_zero=zero
        )

    @classmethod
    def zero(cls, p: int, abs_precision: int) -> "PadicNumber":
        return cls._raw(p, abs_precision, 0, 0, True)

    @classmethod
    def one(cls, p: int, precision: int) -> "PadicNumber":
        return cls._raw(p, 0, 1, precision)

    @classmethod
    def normalized(cls, p: int, v: int, x: int, abs_precision: int) -> "PadicNumber":
        """The value p^v * x known mod p^abs_precision, x any integer."""
        if abs_precision <= v:
            return cls.zero(p, abs_precision)
        modulus = p ** (abs_precision - v)
        x %= modulus
        if x == 0:
            return cls.zero(p, abs_precision)
        k = valuation_of(x, p)
        v += k
        n = abs_precision - v
        return cls._raw(p, v, (x // p ** k) % p ** n, n)

    @classmethod
    def from_rational(cls, q: Rational, p: int, precision: int) -> "PadicNumber":
        """Exact rational rounded to `precision` significant digits."""
        q = Fraction(q)
        if q == 0:
            return cls.zero(p, precision)
        v = rational_valuation(q, p)
        return cls.from_rational_abs(q, p, v + precision)

    @classmethod
    def from_rational_abs(cls, q: Rational, p: int, abs_precision: int) -> "PadicNumber":
        """Exact rational known mod p^abs_precision."""
        q = Fraction(q)
        if q == 0:
            return cls.zero(p, abs_precision)
        vn = valuation_of(q.numerator, p)
        vd = valuation_of(q.denominator, p)
        v = vn - vd
        if abs_precision <= v:
            return cls.zero(p, abs_precision)
        n = abs_precision - v
        modulus = p ** n
        num = q.numerator // p ** vn
        den = q.denominator // p ** vd
        return cls._raw(p, v, num * pow(den, -1, modulus) % modulus, n)

    # ── Accessors ────────────────────────────────────────────

    @property
    def absolute_precision(self) -> int:
        if self.is_zero:
            return self.valuation
        return self.valuation + self.rel_precision

    def lift(self) -> Fraction:
        """A rational representative (exact on the known digits)."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.prime) ** self.valuation

    def norm(self) -> Fraction:
        """p^(-v) for nonzero values, 0 for zero-at-precision."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.prime) ** (-self.valuation)

    def truncate(self, abs_precision: int) -> "PadicNumber":
        """Forget digits at and beyond p^abs_precision (never adds digits)."""
        if abs_precision >= self.absolute_precision:
            return self
        if self.is_zero:
            return PadicNumber.zero(self.prime, abs_precision)
        return PadicNumber.normalized(self.prime, self.valuation, self.unit, abs_precision)

    def agrees_with(self, other: "PadicNumber") -> bool:
        """Equal modulo the coarser of the two declared precisions."""
        return (self - other).is_zero

    # ── Rendering ────────────────────────────────────────────

    def render(self) -> str:
        p = self.prime
        if self.is_zero:
            return f"0 + O({p}^{self.valuation})"
        return f"{p}^{self.valuation} * {self.unit} + O({p}^{self.absolute_precision})"

    def to_json(self) -> Dict[str, object]:
        return {
            "p": self.prime,
            "v": self.valuation,
            "unit": str(self.unit),
            "prec": self.rel_precision,
            "zero": self.is_zero,
        }

    def __str__(self) -> str:
        return self.render()

    # ── Operators ────────────────────────────────────────────

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            return other
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if q == 0:
                return PadicNumber.zero(self.prime, self.absolute_precision)
            v = rational_valuation(q, self.prime)
            cap = max(self.absolute_precision, v + max(self.rel_precision, 1))
            return PadicNumber.from_rational_abs(q, self.prime, cap)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return field_arith(self, other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return field_arith(self, other, "sub")

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return field_arith(other, self, "sub")

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return field_arith(self, other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return field_arith(self, other, "div")

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return field_arith(other, self, "div")

    def __neg__(self) -> "PadicNumber":
        if self.is_zero:
            return self
        n = self.rel_precision
        return PadicNumber._raw(self.prime, self.valuation, (-self.unit) % self.prime ** n, n)

    def __pow__(self, exponent: int) -> "PadicNumber":
        if exponent < 0:
            return PadicNumber.one(self.prime, max(self.rel_precision, 1)) / (self ** -exponent)
        result = PadicNumber.one(self.prime, max(self.rel_precision, 1))
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result


def field_arith(a: PadicNumber, b: PadicNumber, op: str) -> PadicNumber:
    """add | sub | mul | div with precision propagation."""
    if a.prime != b.prime:
        raise PrimeMismatchError(f"cannot combine {a.prime}-adic with {b.prime}-adic")
    p = a.prime

    if op in ("add", "sub"):
        cap = min(a.absolute_precision, b.absolute_precision)
        sign = 1 if op == "add" else -1
        if a.is_zero and b.is_zero:
            return PadicNumber.zero(p, cap)
        if b.is_zero:
            return a.truncate(cap)
        if a.is_zero:
            return b.truncate(cap) if sign == 1 else (-b).truncate(cap)
        base = min(a.valuation, b.valuation)
        x = a.unit * p ** (a.valuation - base) + sign * b.unit * p ** (b.valuation - base)
        return PadicNumber.normalized(p, base, x, cap)

    if op == "mul":
        if a.is_zero or b.is_zero:
            return PadicNumber.zero(p, _zero_product_precision(a, b))
        n = min(a.rel_precision, b.rel_precision)
        return PadicNumber._raw(p, a.valuation + b.valuation, a.unit * b.unit % p ** n, n)

    if op == "div":
        if b.is_zero:
            raise PadicZeroDivisionError("division by a zero-at-precision value")
        if a.is_zero:
            return PadicNumber.zero(p, a.valuation - b.valuation)
        n = min(a.rel_precision, b.rel_precision)
        modulus = p ** n
        return PadicNumber._raw(
            p, a.valuation - b.valuation, a.unit * pow(b.unit, -1, modulus) % modulus, n
        )

    raise ValueError(f"unknown operation {op!r}")


def _zero_product_precision(a: PadicNumber, b: PadicNumber) -> int:
    # a zero stores its absolute precision in `valuation`
    return a.valuation + b.valuation


# ── Transcendental functions ─────────────────────────────────

def teichmuller(a: PadicNumber) -> PadicNumber:
    """The (p-1)-st root of unity congruent to a mod p."""
    if a.is_zero or a.valuation != 0:
        raise PadicDomainError("teichmuller needs a unit (valuation 0)")
    p, n = a.prime, a.rel_precision
    modulus = p ** n
    x = a.unit % modulus
    for _ in range(n):
        x = pow(x, p, modulus)
    return PadicNumber._raw(p, 0, x, n)


def iwasawa_log(a: PadicNumber) -> PadicNumber:
    """Logarithm on the branch with log(p) = 0."""
    if a.is_zero:
        raise PadicDomainError("log of a zero-at-precision value")
    p, n = a.prime, a.rel_precision
    u = PadicNumber._raw(p, 0, a.unit, n)
    one_unit = u / teichmuller(u)
    x = one_unit.lift() - 1
    target = n
    if x == 0:
        return PadicNumber.zero(p, target)
    vx = rational_valuation(x, p)
    total = Fraction(0)
    term = Fraction(1)
    k = 1
    while True:
        term *= x
        total += term / k if k % 2 else -term / k
        k += 1
        if _log_tail_done(k, vx, p, target):
            break
    logger.debug("iwasawa_log: %d terms for p=%d target O(p^%d)", k - 1, p, target)
    return PadicNumber.from_rational_abs(total, p, target)


def _log_tail_done(k: int, vx: int, p: int, target: int) -> bool:
    # every term of index >= k lies beyond the target precision
    j = floor_log(k, p)
    while p ** j <= 64 * (k + target):
        start = max(k, p ** j)
        if start * vx - j < target:
            return False
        j += 1
    return True


def padic_exp(a: PadicNumber) -> PadicNumber:
    """exp(a) for valuation(a) >= 1."""
    p = a.prime
    target = a.absolute_precision
    if a.is_zero:
        return PadicNumber.one(p, max(target, 1))
    if a.valuation < 1:
        raise PadicDomainError("exp converges only for valuation >= 1")
    x = a.lift()
    total = Fraction(1)
    term = Fraction(1)
    k = 1
    while Fraction(k * a.valuation) - Fraction(k - 1, p - 1) < target:
        term = term * x / k
        total += term
        k += 1
    return PadicNumber.from_rational_abs(total, p, target)
