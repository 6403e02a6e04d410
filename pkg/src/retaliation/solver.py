"""Subgame perfect equilibria of the retaliation game.

Tie rule everywhere: a mover indifferent between fighting and quitting quits.
With floating-point decay, values within ``1e-9`` of each other are ties.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ._num import gt
from .decay import Linear, parity_floor, phi_eval, phi_inverse
from .game import (
    GameParams,
    Player,
    StrategyProfile,
    TerminalOutcome,
    continuation_utilities,
    mover,
    terminal_payoffs,
    truncation_horizon,
)

MAX_BRUTE_FORCE_HORIZON = 14


class SolverError(ValueError):
    pass


@dataclass(frozen=True)
class EquilibriumResult:
    profile: StrategyProfile
    # node_values[t] = (value to mover at t, value to the other player) under optimal play from t
    node_values: tuple
    root_outcome: TerminalOutcome

    @property
    def attack_occurs(self) -> bool:
        return self.profile.p(0) == 1


@dataclass(frozen=True)
class Deviation:
    t: int
    player: Player
    current_p: Fraction
    improving_p: int
    gain: object


@dataclass(frozen=True)
class DeviationReport:
    deviations: tuple = field(default_factory=tuple)

    @property
    def is_spe(self) -> bool:
        return not self.deviations

    def at(self, player: Player) -> list:
        return [d for d in self.deviations if d.player == player]


def _idx(player: Player) -> int:
    return 0 if player == "A" else 1


def _quit_dominant(g: GameParams, t: int) -> bool:
    """Quit beats even the best outcome fighting can reach.

    The best a fighter can hope for is the opponent quitting straight away,
    which gains ``phi(t+1) v - c`` over quitting now (plus ``r`` for D).
    """
    gain = g.asset_value(t + 1) - (g.c if g.exact else float(g.c))
    if mover(t) == "D":
        gain += g.r if g.exact else float(g.r)
    return not gt(gain, 0)


def _path_end(choices: dict, t: int) -> int:
    while choices.get(t, 0) == 1:
        t += 1
    return t


def backward_induction(g: GameParams) -> EquilibriumResult:
    horizon = truncation_horizon(g)
    # first node at or after the horizon where the mover quits regardless of the future
    end = horizon
    while not _quit_dominant(g, end):
        end += 1
    values = {end: terminal_payoffs(g, mover(end), end)}
    choices = {end: 0}
    for t in range(end - 1, -1, -1):
        who = _idx(mover(t))
        quit = terminal_payoffs(g, mover(t), t)
        fight = values[t + 1]
        if not _quit_dominant(g, t) and gt(fight[who], quit[who]):
            choices[t], values[t] = 1, fight
        else:
            choices[t], values[t] = 0, quit
    last = max([horizon] + [t for t, p in choices.items() if p == 1])
    profile = StrategyProfile(tuple(choices.get(t, 0) for t in range(last + 1)))
    node_values = tuple(
        (values[t][_idx(mover(t))], values[t][1 - _idx(mover(t))]) for t in range(last + 1)
    )
    stop = _path_end(choices, 0)
    a, d = values[0]
    return EquilibriumResult(profile, node_values, TerminalOutcome(mover(stop), stop, a, d))


def one_deviation_check(g: GameParams, sigma: StrategyProfile) -> DeviationReport:
    """List every node where switching ``p_t`` to 0 or 1 strictly helps the mover.

    Expected utility is affine in ``p_t`` with everything else fixed, so an
    interior value is never strictly better than the better endpoint; testing
    ``{0, 1}`` is enough.
    """
    horizon = truncation_horizon(g)
    found = []
    for t in range(max(horizon, len(sigma) - 1) + 1):
        who = _idx(mover(t))
        current = continuation_utilities(g, sigma, t)[who]
        best_p, best_gain = None, None
        for alt in (0, 1):
            if sigma.p(t) == alt:
                continue
            alt_value = continuation_utilities(g, sigma.with_p(t, alt), t)[who]
            if gt(alt_value, current):
                gain = alt_value - current
                if best_gain is None or gain > best_gain:
                    best_p, best_gain = alt, gain
        if best_p is not None:
            found.append(Deviation(t, mover(t), sigma.p(t), best_p, best_gain))
    return DeviationReport(tuple(found))


def brute_force_equilibrium(g: GameParams, max_horizon: int = 12) -> EquilibriumResult:
    """Enumerate every pure profile on ``0..horizon`` and keep the subgame perfect one.

    Play past the horizon is a forced quit. A profile survives when, at every
    node, the mover fights exactly when fighting is strictly better than
    quitting given the rest of the profile. Independent of
    :func:`backward_induction`: no values are propagated between profiles.
    """
    if max_horizon > MAX_BRUTE_FORCE_HORIZON:
        raise SolverError(f"max_horizon is capped at {MAX_BRUTE_FORCE_HORIZON}")
    horizon = truncation_horizon(g)
    if horizon > max_horizon:
        raise SolverError(f"horizon {horizon} exceeds max_horizon {max_horizon}")
    n = horizon + 1
    term = [terminal_payoffs(g, mover(t), t) for t in range(n + 1)]
    survivors = []
    for bits in itertools.product((0, 1), repeat=n):
        # stop[t]: node where play starting at t ends under this profile
        stop = [n] * (n + 1)
        for t in range(n - 1, -1, -1):
            stop[t] = stop[t + 1] if bits[t] else t
        ok = True
        for t in range(n - 1, -1, -1):
            who = _idx(mover(t))
            fight = term[stop[t + 1]][who]
            quit = term[t][who]
            if bool(bits[t]) != gt(fight, quit):
                ok = False
                break
        if ok:
            survivors.append((bits, stop))
    if len(survivors) != 1:
        raise SolverError(f"expected a unique equilibrium, found {len(survivors)}")
    bits, stop = survivors[0]
    node_values = []
    for t in range(n):
        who = _idx(mover(t))
        payoff = term[stop[t]]
        node_values.append((payoff[who], payoff[1 - who]))
    end = stop[0]
    a, d = term[end]
    return EquilibriumResult(
        StrategyProfile(bits), tuple(node_values), TerminalOutcome(mover(end), end, a, d)
    )


def last_profitable_mover(g: GameParams) -> Player:
    """D if D's last profitable odd step comes after A's last profitable even step."""
    be = g.break_even()
    if be.defender_unbounded:
        return "D"
    if be.t_defender < 1:
        return "A"
    if parity_floor(be.t_attacker, "even") < parity_floor(be.t_defender, "odd"):
        return "D"
    return "A"


@dataclass(frozen=True)
class ReputationSafety:
    linear_condition: Optional[bool]  # None when decay is not linear
    general_condition: bool
    d_last_mover: bool
    general_threshold: object  # r must exceed this
    clamped: bool  # phi^-1(c/v) + 1 fell past the point where phi reaches 0


def reputation_safety(g: GameParams) -> ReputationSafety:
    """Sufficient conditions on the reputation cost for the no-attack outcome.

    ``general_condition`` is ``r > c - v * phi(phi^-1(c/v) + 1)``; for linear
    decay ``linear_condition`` is the simpler ``r > gamma * v``.
    """
    fn = g.decay
    ratio = g.c / g.v
    t_a = phi_inverse(fn, ratio if fn.exact else float(ratio))
    clamped = False
    if isinstance(fn, Linear):
        clamped = t_a + 1 > 1 / fn.gamma
    after = phi_eval(fn, t_a + 1)
    if fn.exact:
        threshold = g.c - g.v * after
        general = g.r > threshold
    else:
        threshold = float(g.c) - float(g.v) * after
        general = gt(float(g.r), threshold)
    linear = g.r > fn.gamma * g.v if isinstance(fn, Linear) else None
    return ReputationSafety(
        linear_condition=linear,
        general_condition=general,
        d_last_mover=last_profitable_mover(g) == "D",
        general_threshold=threshold,
        clamped=clamped,
    )
