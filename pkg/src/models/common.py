"""
Shared field types for the pydantic models.
"""
from fractions import Fraction
from typing import Annotated, Any

from pydantic import PlainSerializer, PlainValidator


def parse_rational(value: Any) -> Fraction:
    """
    Coerce ints, decimal or "a/b" strings and floats to an exact Fraction.

    Floats go through their shortest repr so 0.6 becomes 3/5, not the
    binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational: {value!r}") from e
    raise ValueError(f"not a rational: {value!r}")


# Exact rational, serialised as "a/b"
Rational = Annotated[
    Fraction,
    PlainValidator(parse_rational),
    PlainSerializer(lambda f: str(f), return_type=str),
]
