"""Small exact-arithmetic helpers shared across modules."""

from __future__ import annotations

import math
from fractions import Fraction


def gen_binomial(a: Fraction, k: int) -> Fraction:
    """Generalised binomial coefficient a(a-1)...(a-k+1)/k!."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out = Fraction(1)
    for i in range(k):
        out = out * (Fraction(a) - i) / (i + 1)
    return out


def half_binomial(k: int) -> Fraction:
    return gen_binomial(Fraction(1, 2), k)


def neg_half_binomial(k: int) -> Fraction:
    return gen_binomial(Fraction(-1, 2), k)


def parse_rational(text) -> Fraction:
    """Parse "p/q" or integer strings into an exact rational."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise ValueError("refusing to coerce a float to an exact rational: %r" % text)
    s = str(text).strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def exp_lower(x: Fraction, terms: int = 40) -> Fraction:
    """Rational lower bound on exp(x) for x >= 0 (Taylor partial sum)."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("exp_lower requires x >= 0")
    acc = Fraction(0)
    term = Fraction(1)
    for i in range(terms):
        acc += term
        term = term * x / (i + 1)
    return acc


def exp_upper(x: Fraction, terms: int = 40) -> Fraction:
    """Rational upper bound on exp(x) for x >= 0.

    Partial Taylor sum plus a geometric tail bound; requires x < terms.
    """
    x = Fraction(x)
    if x < 0:
        raise ValueError("exp_upper requires x >= 0")
    if x >= terms:
        raise ValueError("increase terms: need x < terms for the tail bound")
    acc = Fraction(0)
    term = Fraction(1)
    for i in range(terms):
        acc += term
        term = term * x / (i + 1)
    # remaining terms are dominated by term * (x/terms)^j
    ratio = x / terms
    acc += term / (1 - ratio)
    return acc


def fraction_to_float(x) -> float:
    if isinstance(x, Fraction):
        return x.numerator / x.denominator
    return float(x)


def log_abs_float(x) -> float:
    """log|x| for rationals too large for float conversion."""
    if isinstance(x, Fraction):
        num, den = abs(x.numerator), x.denominator
        if num == 0:
            return float("-inf")
        # exact enough for slope fits: use integer bit lengths as a fallback
        try:
            return math.log(num) - math.log(den)
        except OverflowError:
            return ((num.bit_length() - den.bit_length()) * math.log(2))
    return math.log(abs(x))
