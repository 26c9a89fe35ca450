"""Exact money arithmetic helpers.

Bids, costs, payments and welfare are all ``fractions.Fraction``. Input
accepts integers and decimal strings; floats are refused because they
cannot round-trip a decimal like ``0.1`` exactly.
"""
from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from typing import Union

Number = Union[int, str, Fraction, Decimal]

ZERO = Fraction(0)


def to_rational(value: Number) -> Fraction:
    """Convert ``value`` to a ``Fraction`` without any rounding."""
    if isinstance(value, bool):
        raise TypeError("booleans are not amounts")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Decimal)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty amount")
        try:
            return Fraction(text)
        except ValueError:
            raise ValueError(f"not an exact decimal: {value!r}") from None
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not exact; pass a decimal string")
    raise TypeError(f"unsupported amount type {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    """Render as an exact decimal string, or ``p/q`` when no finite decimal exists."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = abs(value.numerator) * 10**digits // value.denominator
    sign = "-" if value < 0 else ""
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0")


def to_json_number(value: Fraction) -> Union[int, str]:
    """Integers stay JSON integers; anything else becomes a decimal string."""
    if value.denominator == 1:
        return value.numerator
    return format_rational(value)
