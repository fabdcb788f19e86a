"""Exact rational parsing and serialization helpers."""

from fractions import Fraction
from numbers import Rational

TAU = 1e-9


def to_rational(value) -> Fraction:
    """Parse ``"p/q"``, a decimal string, an int, or a Fraction.

    Floats are converted exactly (binary expansion), so prefer strings for
    user-facing input.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        return Fraction(text)
    raise TypeError(f"cannot read {value!r} as a rational")


def rational_str(value) -> str:
    """``"p/q"`` for non-integers, ``"p"`` for integers."""
    q = Fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def number_json(value):
    """JSON form of a value: rationals as strings, floats unchanged."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (Fraction, int)):
        return rational_str(value)
    return float(value)


def parse_rational_list(text: str) -> list[Fraction]:
    return [to_rational(t) for t in text.split(",") if t.strip()]
