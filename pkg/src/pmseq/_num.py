"""Exact extended-real coercion and JSON encoding shared by every module."""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Union

Ext = Union[Fraction, float]  # float only for +/-inf

INF = math.inf
NEG_INF = -math.inf


def as_ext(x) -> Ext:
    """Coerce a number or string to an exact extended real.

    Finite values become ``Fraction``; floats go through their shortest repr so
    that ``0.3`` means 3/10. Infinities stay as float infinities.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if math.isnan(x):
            raise ValueError("NaN is not an extended real")
        if math.isinf(x):
            return x
        return Fraction(repr(x))
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return INF
        if s in ("-inf", "-infinity"):
            return NEG_INF
        return Fraction(s)
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, numbers.Real):
        return as_ext(float(x))
    raise TypeError(f"cannot read {x!r} as an extended real")


def as_unit(x) -> Fraction:
    v = as_ext(x)
    if isinstance(v, float) or not 0 <= v <= 1:
        raise ValueError(f"value {x!r} is not in [0, 1]")
    return v


def encode(x):
    """JSON form of an extended real: int, "p/q" string, or "+-inf"."""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return x.numerator
        return f"{x.numerator}/{x.denominator}"
    return x
