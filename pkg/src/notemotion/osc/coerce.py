"""Numeric coercion between OSC wire values and attribute domains.

The float/int friction is resolved by explicit rules: float -> int rounds
half away from zero; floats targeting an 8-bit attribute are scaled by 255
first (so 0.5 -> 128); int -> float widening is exact below 2**24.
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction

from .types import UncoercibleValue


class AttrType(Enum):
    FLOAT = "float"
    INT = "int"
    INT8 = "int8"  # stored 0-255
    RATIONAL = "rational"


def round_half_away(x: float) -> int:
    return math.floor(x + 0.5) if x >= 0 else math.ceil(x - 0.5)


def coerce(value, target: AttrType):
    """Coerce an OSC int32/float32 argument to the target attribute type."""
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, (str, bytes, bytearray)):
        raise UncoercibleValue(f"cannot coerce {type(value).__name__} {value!r} to {target.value}")
    if target is AttrType.FLOAT:
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, Fraction):
            return float(value)
    elif target is AttrType.INT:
        if isinstance(value, int):
            return value
        if isinstance(value, float):
            return round_half_away(value)
    elif target is AttrType.INT8:
        if isinstance(value, int):
            return min(max(value, 0), 255)
        if isinstance(value, float):
            return min(max(round_half_away(value * 255), 0), 255)
    elif target is AttrType.RATIONAL:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, float):
            return Fraction(value)  # exact binary expansion
    raise UncoercibleValue(f"cannot coerce {type(value).__name__} to {target.value}")
