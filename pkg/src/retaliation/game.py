"""The retaliation game between an attacker A and a defender D.

Time ``t`` counts completed attacks. A moves at even ``t``, D at odd ``t``.
Fighting costs ``c`` and advances to ``t + 1``; quitting ends the game and
leaves the asset, now worth ``phi(t) * v``, with the opponent. D additionally
loses reputation ``r`` when it quits.

Terminal payoffs ``(A, D)``::

    A quits at even t:  (-(t/2) c,              phi(t) v - (t/2) c)
    D quits at odd t:   (phi(t) v - ((t+1)/2) c, -r - ((t-1)/2) c)

These reproduce the three concrete early nodes of the usual game-tree figure,
``(0, v)``, ``(phi(1) v - c, -r)`` and ``(-c, phi(2) v - c)``, and extend them
by charging each player ``c`` per fight it has made.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

from . import decay as _decay
from ._num import Number, as_fraction, floor_snapped
from .decay import DecayFn, break_even_times, phi_eval

Player = Literal["A", "D"]


class GameError(ValueError):
    pass


class NonTerminatingProfile(GameError):
    pass


@dataclass(frozen=True)
class GameParams:
    v: Fraction
    c: Fraction
    r: Fraction
    decay: DecayFn

    def __post_init__(self):
        for name in ("v", "c", "r"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if isinstance(self.decay, str):
            object.__setattr__(self, "decay", _decay.parse_decay(self.decay))
        if self.v <= 0:
            raise GameError("v must be > 0")
        if self.c <= 0:
            raise GameError("c must be > 0")
        if self.r <= 0:
            raise GameError("r must be > 0")
        if self.c >= self.v:
            raise _decay.GameNeverStarts(self.c, self.v)

    @property
    def exact(self) -> bool:
        return self.decay.exact

    def phi(self, t):
        return phi_eval(self.decay, t)

    def asset_value(self, t):
        """``phi(t) * v`` in the arithmetic matching the decay family."""
        p = self.phi(t)
        if isinstance(p, float):
            return p * float(self.v)
        return p * self.v

    def break_even(self) -> _decay.BreakEvenTimes:
        return break_even_times(self.v, self.c, self.r, self.decay)


def mover(t: int) -> Player:
    return "A" if t % 2 == 0 else "D"


def round_number(t: int) -> int:
    return t // 2 + 1


@dataclass(frozen=True)
class StrategyProfile:
    """Fight probabilities ``p_0 .. p_T``.

    Beyond the listed entries the profile continues with ``tail``: 0 (quit,
    the usual reading) or 1 (fight forever, only valid if some listed entry
    is 0 so the game still ends).
    """

    probs: tuple
    tail: int = 0

    def __post_init__(self):
        ps = tuple(as_fraction(p) for p in self.probs)
        if not ps:
            raise GameError("a strategy profile needs at least one entry")
        if any(not 0 <= p <= 1 for p in ps):
            raise GameError("profile entries must lie in [0, 1]")
        if self.tail not in (0, 1):
            raise GameError("tail must be 0 or 1")
        object.__setattr__(self, "probs", ps)

    def __len__(self):
        return len(self.probs)

    def p(self, t: int) -> Fraction:
        if t < len(self.probs):
            return self.probs[t]
        return Fraction(self.tail)

    def with_p(self, t: int, value: Number) -> "StrategyProfile":
        ps = list(self.probs)
        if t >= len(ps):
            ps.extend([Fraction(self.tail)] * (t + 1 - len(ps)))
        ps[t] = as_fraction(value)
        return StrategyProfile(tuple(ps), self.tail)

    @property
    def degenerate(self) -> bool:
        return all(p in (0, 1) for p in self.probs)

    def to_json(self) -> list:
        return [str(p) for p in self.probs]

    @classmethod
    def from_json(cls, items: Sequence) -> "StrategyProfile":
        return cls(tuple(as_fraction(x) for x in items))


@dataclass(frozen=True)
class TerminalOutcome:
    quitter: Player
    time_t: int
    payoff_A: object
    payoff_D: object

    def __post_init__(self):
        if (self.quitter == "A") != (self.time_t % 2 == 0):
            raise GameError("A quits at even t, D at odd t")


def terminal_payoffs(g: GameParams, quitter: Player, t: int):
    """Payoffs ``(A, D)`` when ``quitter`` quits at time ``t``."""
    if t < 0:
        raise GameError("t must be >= 0")
    if quitter not in ("A", "D"):
        raise GameError(f"unknown player {quitter!r}")
    if mover(t) != quitter:
        raise GameError(f"{quitter} does not move at t={t}")
    c = g.c if g.exact else float(g.c)
    w = g.asset_value(t)
    if quitter == "A":
        k = t // 2
        return -k * c, w - k * c
    r = g.r if g.exact else float(g.r)
    return w - (t + 1) // 2 * c, -r - (t - 1) // 2 * c


def terminal_outcome(g: GameParams, t: int) -> TerminalOutcome:
    a, d = terminal_payoffs(g, mover(t), t)
    return TerminalOutcome(mover(t), t, a, d)


def truncation_horizon(g: GameParams) -> int:
    """One step beyond the floor of the earlier break-even time."""
    be = g.break_even()
    if be.defender_unbounded:
        return floor_snapped(be.t_attacker) + 1
    return floor_snapped(min(be.t_attacker, be.t_defender)) + 1


def _within(t: int, bound) -> bool:
    if isinstance(bound, float):
        if math.isinf(bound):
            return True
        return t <= bound or math.isclose(t, bound, rel_tol=1e-9, abs_tol=1e-9)
    return t <= bound


def paper_spe_profile(g: GameParams) -> StrategyProfile:
    """D fights at every odd ``t <= T_D``; A never fights."""
    t_d = g.break_even().t_defender
    h = truncation_horizon(g)
    return StrategyProfile(tuple(1 if t % 2 == 1 and _within(t, t_d) else 0 for t in range(h + 1)))


def continuation_utilities(g: GameParams, sigma: StrategyProfile, start: int = 0):
    """Expected ``(A, D)`` payoffs of play under ``sigma`` from node ``start``."""
    if sigma.tail == 1 and not any(p == 0 for p in sigma.probs[start:]):
        raise NonTerminatingProfile("profile fights forever from this node")
    zero = Fraction(0) if g.exact else 0.0
    eu_a = eu_d = zero
    reach = Fraction(1)
    t = start
    while reach:
        p = sigma.p(t)
        q = 1 - p
        if q:
            a, d = terminal_payoffs(g, mover(t), t)
            w = q * reach if g.exact else float(q * reach)
            eu_a += w * a
            eu_d += w * d
        reach *= p
        t += 1
    return eu_a, eu_d


def expected_utilities(g: GameParams, sigma: StrategyProfile):
    return continuation_utilities(g, sigma, 0)
