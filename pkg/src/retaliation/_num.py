"""Exact-number helpers shared by the modules."""

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction
from typing import Union

Number = Union[int, float, Fraction, Decimal, str]

# Comparison tolerance for values that went through floating point.
TOL = 1e-9


def as_fraction(x: Number) -> Fraction:
    """Convert user input to an exact rational.

    Floats are read through their shortest repr, so ``0.1`` becomes 1/10
    rather than the binary approximation.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"not a finite number: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, Decimal):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def close(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=TOL, abs_tol=TOL)


def gt(a, b) -> bool:
    """Strict ``a > b``; inexact operands within tolerance count as equal."""
    if isinstance(a, (Fraction, int)) and isinstance(b, (Fraction, int)):
        return a > b
    return a > b and not close(a, b)


def floor_snapped(x) -> int:
    """floor(x), snapping floats that sit within tolerance of an integer."""
    if isinstance(x, (Fraction, int)):
        return math.floor(x)
    nearest = round(x)
    if math.isclose(x, nearest, rel_tol=TOL, abs_tol=TOL):
        return int(nearest)
    return math.floor(x)


def format_number(x) -> str:
    """Plain decimal string, no exponent.

    Terminating rationals print exactly; others are rounded to 12 places.
    Infinite values print as ``unbounded``.
    """
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "unbounded"
        d = Decimal(repr(x))
    elif isinstance(x, (int, Fraction)):
        q = Fraction(x)
        den = q.denominator
        for p in (2, 5):
            while den % p == 0:
                den //= p
        if den == 1:
            d = Decimal(q.numerator) / Decimal(q.denominator)
            # exact: the division terminates within default precision for money-sized values
            if Fraction(d) != q:
                d = _long_divide(q)
        else:
            d = (Decimal(q.numerator) / Decimal(q.denominator)).quantize(Decimal("1e-12"))
    else:
        d = Decimal(x)
    s = format(d, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    if s in ("-0", ""):
        s = "0"
    return s


def _long_divide(q: Fraction) -> Decimal:
    from decimal import localcontext

    with localcontext() as ctx:
        ctx.prec = 200
        return Decimal(q.numerator) / Decimal(q.denominator)


def format_param(x) -> str:
    """Decimal when exact, otherwise ``p/q``; always parses back to the same value."""
    q = Fraction(x)
    den = q.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return format_number(q) if den == 1 else str(q)
