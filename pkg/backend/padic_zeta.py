"""
Depth-one p-adic zeta values from the Kubota-Leopoldt L-function.

    zeta_p(k) = p^k / (p^k - 1) * L_p(k, omega^(1-k))

with L_p evaluated through the Bernoulli expansion at conductor p:

    L_p(s, chi) = 1/p * 1/(s-1) * sum_{a=1, p!|a}^{p} chi(a) <a>^(1-s)
                  * sum_j binom(1-s, j) B_j (p/a)^j

For chi = omega^(1-k) and s = k the factor chi(a) <a>^(1-k) is a^(1-k).
"""
from __future__ import annotations

import logging
from fractions import Fraction
from functools import lru_cache

from sympy import Rational, bernoulli, binomial

from backend.errors import PadicDomainError
from backend.padic_core import PadicNumber, rational_valuation, valuation_of

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def bernoulli_number(j: int) -> Fraction:
    """B_j with the convention B_1 = -1/2."""
    if j == 1:
        return Fraction(-1, 2)
    b = Rational(bernoulli(j))
    return Fraction(int(b.p), int(b.q))


def _l_value_partial(k: int, p: int, terms: int) -> Fraction:
    total = Fraction(0)
    for a in range(1, p):
        inner = Fraction(0)
        ratio = Fraction(p, a)
        for j in range(terms + 1):
            b = bernoulli_number(j)
            if b:
                inner += int(binomial(1 - k, j)) * b * ratio ** j
        total += Fraction(a) ** (1 - k) * inner
    return total / (p * (k - 1))


def kubota_leopoldt(k: int, p: int, precision: int) -> PadicNumber:
    """L_p(k, omega^(1-k)) to `precision` significant digits, k >= 2."""
    if k < 2:
        raise ValueError("kubota_leopoldt needs k >= 2")
    slack = 2 + valuation_of(k - 1, p)
    terms = precision + slack + 2
    while True:
        value = _l_value_partial(k, p, terms)
        if value == 0:
            return PadicNumber.zero(p, terms - slack)
        # every omitted term has valuation >= terms + 1 - slack
        reach = terms + 1 - slack
        v = rational_valuation(value, p)
        if reach >= v + precision:
            logger.debug("kubota_leopoldt: k=%d p=%d used %d Bernoulli terms", k, p, terms)
            return PadicNumber.from_rational_abs(value, p, v + precision)
        terms = v + precision + slack


def hurwitz_zeta(k: int, x: Fraction, p: int, precision: int) -> PadicNumber:
    """zeta_p(k, x) for v_p(x) < 0, to O(p^precision) absolute.

    The regularized value of sum_{m >= 0} (x + m)^(-k):

        1/(k-1) * x^(1-k) * sum_j binom(1-k, j) B_j x^(-j)
    """
    if k < 2:
        raise ValueError("hurwitz_zeta needs k >= 2")
    x = Fraction(x)
    e = -rational_valuation(x, p) if x else 0
    if e < 1:
        raise PadicDomainError(f"hurwitz_zeta needs v_{p}(x) < 0, got x = {x}")
    slack = 1 + valuation_of(k - 1, p)
    # v(term_j) >= e * (k - 1 + j) - slack
    terms = max(0, -(-(precision + slack) // e) - k)
    total = Fraction(0)
    for j in range(terms + 1):
        b = bernoulli_number(j)
        if b:
            total += int(binomial(1 - k, j)) * b / x ** j
    value = x ** (1 - k) * total / (k - 1)
    return PadicNumber.from_rational_abs(value, p, precision)


def depth_one_zeta(k: int, p: int, precision: int) -> PadicNumber:
    """zeta_p(k); exactly zero for k = 1 and for even k."""
    if k < 1:
        raise ValueError("depth_one_zeta needs k >= 1")
    if k == 1 or k % 2 == 0:
        return PadicNumber.zero(p, precision + k)
    l_value = kubota_leopoldt(k, p, precision)
    factor = PadicNumber.from_rational(Fraction(p ** k, p ** k - 1), p, precision)
    return factor * l_value
