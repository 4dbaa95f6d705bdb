"""Exact rational arithmetic helpers and the three-way inequality verdict policy.

All distances, radii and masses in this package are `fractions.Fraction`
values; only transcendental bound formulas (exp, log, powers) are evaluated
in double precision.  Comparing an exact left-hand side against a float
right-hand side therefore needs an explicit safety margin: we only certify
"verified" when lhs <= rhs*(1-MARGIN) and only certify "violated" when
lhs >= rhs*(1+MARGIN); anything in between is "inconclusive".
"""

from __future__ import annotations

from fractions import Fraction
from math import log
from typing import Union

Rational = Union[int, Fraction]

VERIFIED = "verified"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"

# Relative band inside which an exact-vs-float comparison refuses to decide.
MARGIN = 1e-9


class DomainError(ValueError):
    """Invalid argument for an operation (out of the stated domain)."""


class WindowError(RuntimeError):
    """A lazy enumeration was asked to go beyond its safe radius/window."""

    def __init__(self, message, required=None, available=None):
        super().__init__(message)
        self.required = required
        self.available = available


def rational(value) -> Fraction:
    """Coerce ints, Fractions, floats and 'p/q' strings to an exact Fraction.

    Floats convert exactly (every binary float is rational), so callers may
    pass literals like 0.5 without losing exactness.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise DomainError(f"cannot interpret {value!r} as a rational")


def fmt_rational(q: Rational) -> str:
    """Serialize a rational as 'p/q' (or 'p' when integral)."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def decimal12(q: Rational) -> str:
    """Decimal rendering with 12 significant digits (CSV convenience column)."""
    return f"{float(Fraction(q)):.12g}"


def log_of_rational(q: Rational) -> float:
    """ln of a positive rational, safe for numerators beyond float range."""
    q = Fraction(q)
    if q <= 0:
        raise DomainError("log of nonpositive rational")
    return log(q.numerator) - log(q.denominator)


def classify_le(lhs: Rational, rhs: float) -> str:
    """Verdict for the claim `lhs <= rhs` with lhs exact and rhs float."""
    lhs = float(Fraction(lhs))
    if lhs <= rhs * (1.0 - MARGIN):
        return VERIFIED
    if lhs >= rhs * (1.0 + MARGIN):
        return VIOLATED
    return INCONCLUSIVE
