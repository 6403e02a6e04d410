"""Value decay of the contested asset as attacks pile up.

``phi(t)`` is the fraction of the original value left after ``t`` completed
attacks. Three families are supported:

* ``Linear(gamma)``: ``max(1 - gamma*t, 0)``, exact rationals throughout.
* ``Geometric(delta)``: ``(1 - delta)**t``, floating point.
* ``Table(values)``: tabulated at integer ``t``; holds its last value beyond the table.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Union

from ._num import TOL, Number, as_fraction, format_param

UNBOUNDED = math.inf


class DecayError(ValueError):
    pass


class GameNeverStarts(DecayError):
    def __init__(self, c, v):
        super().__init__(f"game never starts: attack cost c={c} is not below the value v={v}")


@dataclass(frozen=True)
class Linear:
    gamma: Fraction

    exact = True

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_fraction(self.gamma))
        if not 0 < self.gamma <= 1:
            raise DecayError("linear decay needs 0 < gamma <= 1")

    def __str__(self):
        return f"linear({format_param(self.gamma)})"


@dataclass(frozen=True)
class Geometric:
    delta: Fraction

    exact = False

    def __post_init__(self):
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if not 0 < self.delta < 1:
            raise DecayError("geometric decay needs 0 < delta < 1")

    def __str__(self):
        return f"geometric({format_param(self.delta)})"


@dataclass(frozen=True)
class Table:
    values: tuple

    exact = True

    def __post_init__(self):
        vals = tuple(as_fraction(v) for v in self.values)
        if not vals or vals[0] != 1:
            raise DecayError("decay table must start at 1")
        for a, b in zip(vals, vals[1:]):
            if b < 0 or b > a or (b == a and a != 0):
                raise DecayError("decay table must strictly decrease until it reaches 0")
        object.__setattr__(self, "values", vals)

    def __str__(self):
        return "table(" + ",".join(format_param(v) for v in self.values) + ")"


DecayFn = Union[Linear, Geometric, Table]

_DECAY_RE = re.compile(r"^\s*(linear|geometric|table)\s*\((.*)\)\s*$", re.I)


def parse_decay(text: str) -> DecayFn:
    """Parse the config spelling: ``linear(0.1)``, ``geometric(0.05)``, ``table(1,0.8,0.6)``."""
    m = _DECAY_RE.match(text)
    if not m:
        raise DecayError(f"cannot parse decay function {text!r}")
    kind, body = m.group(1).lower(), m.group(2)
    try:
        if kind == "linear":
            return Linear(as_fraction(body))
        if kind == "geometric":
            return Geometric(as_fraction(body))
        return Table(tuple(as_fraction(x) for x in body.split(",")))
    except (ValueError, ZeroDivisionError) as exc:
        raise DecayError(f"cannot parse decay function {text!r}: {exc}") from exc


def phi_eval(fn: DecayFn, t: Number):
    """Remaining value fraction after ``t`` attacks."""
    if isinstance(t, float) and not isinstance(fn, Geometric):
        t = as_fraction(t)
    if t < 0:
        raise DecayError(f"time must be >= 0, got {t}")
    if isinstance(fn, Linear):
        t = as_fraction(t)
        return max(1 - fn.gamma * t, Fraction(0))
    if isinstance(fn, Geometric):
        if t == 0:
            return 1.0
        return (1.0 - float(fn.delta)) ** float(t)
    t = as_fraction(t)
    if t.denominator != 1:
        raise DecayError(f"table decay is defined at integer times only, got {t}")
    i = int(t)
    return fn.values[min(i, len(fn.values) - 1)]


def phi_inverse(fn: DecayFn, y: Number):
    """Smallest ``t`` with ``phi(t) == y``."""
    if isinstance(fn, Geometric):
        y = float(y)
        if not 0 < y <= 1:
            raise DecayError(f"{y} is outside the range (0, 1] of geometric decay")
        if y == 1:
            return 0.0
        t = math.log(y) / math.log(1.0 - float(fn.delta))
        nearest = round(t)
        if math.isclose(t, nearest, rel_tol=TOL, abs_tol=TOL):
            return float(nearest)
        return t
    y = as_fraction(y)
    if not 0 <= y <= 1:
        raise DecayError(f"{y} is outside [0, 1]")
    if isinstance(fn, Linear):
        return (1 - y) / fn.gamma
    for i, v in enumerate(fn.values):
        if v == y:
            return Fraction(i)
    raise DecayError(f"{y} is not attained by the decay table")


def _first_time_at_or_below(fn: Table, y: Fraction):
    for i, v in enumerate(fn.values):
        if v <= y:
            return Fraction(i)
    return None


@dataclass(frozen=True)
class BreakEvenTimes:
    t_attacker: object
    t_defender: object  # UNBOUNDED when the defender always prefers to fight

    @property
    def defender_unbounded(self) -> bool:
        return isinstance(self.t_defender, float) and math.isinf(self.t_defender)


def _break_even(fn: DecayFn, y):
    """Time at which phi first drops to ``y``; UNBOUNDED if it never does."""
    if isinstance(fn, Table):
        # integer-time family: first integer step whose value is at or below y
        t = _first_time_at_or_below(fn, y)
        return UNBOUNDED if t is None else t
    if y < 0:
        return UNBOUNDED
    if y == 0 and isinstance(fn, Geometric):
        return UNBOUNDED
    return phi_inverse(fn, y)


def break_even_times(v: Number, c: Number, r: Number, fn: DecayFn) -> BreakEvenTimes:
    v, c, r = as_fraction(v), as_fraction(c), as_fraction(r)
    if v <= 0 or c <= 0 or r <= 0:
        raise DecayError("v, c and r must all be > 0")
    if c >= v:
        raise GameNeverStarts(c, v)
    t_a = _break_even(fn, c / v)
    if t_a == UNBOUNDED:
        raise DecayError("attacker never breaks even: the decay table never falls to c/v")
    t_d = _break_even(fn, (c - r) / v)
    return BreakEvenTimes(t_a, t_d)


def parity_floor(x, parity: Literal["odd", "even"]) -> int:
    """Largest integer of the given parity that is <= x."""
    if parity not in ("odd", "even"):
        raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")
    if x < 0 or (parity == "odd" and x < 1):
        raise DecayError(f"no {parity} integer <= {x} in range")
    f = math.floor(x)
    want = 1 if parity == "odd" else 0
    return f if f % 2 == want else f - 1
