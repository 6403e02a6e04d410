"""Mining-race simulator for single attacks and retaliation episodes.

Two modes:

* ``stylized``: closed-form cost accounting; the attacker mines exactly ``e``
  blocks in ``e / beta`` honest-block-times.
* ``race``: both branches mine from the fork point. Honest hashpower finds
  blocks at rate 1 per honest-block-time, the renter at rate ``beta``. A fight
  succeeds once the fighter's branch is strictly longer than the canonical
  one (and, for the first attack, the public branch has ``e`` confirmations).

The double-spend block is counted as the attacker's block 1. Race episodes
draw from ``numpy.random.default_rng([seed, run_index])`` so every run owns an
independent, replayable stream.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional, Sequence

import numpy as np

from ._num import format_number
from .econ import EconParams, MajorityRequired, net_attack_cost
from .game import GameParams, NonTerminatingProfile, StrategyProfile, mover
from .ingest import ReorgEvent

Mode = Literal["stylized", "race"]
BlockModel = Literal["deterministic", "exponential"]

RUN_CAP = 10**6
DOUBLE_SPEND_BLOCK_CONVENTION = "double-spend block counted as attacker block 1"


class SimError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    econ: EconParams
    game: Optional[GameParams] = None
    block_model: BlockModel = "deterministic"
    seed: Optional[int] = None
    mode: Mode = "stylized"
    ticks_per_honest_block: int = 100
    chain_id: str = "SIM"
    start_time: int = 1_600_000_000
    block_seconds: int = 600
    fork_height: int = 100_000
    tags: tuple = ("attacker", "defender")

    def __post_init__(self):
        if self.mode not in ("stylized", "race"):
            raise SimError(f"unknown mode {self.mode!r}")
        if self.block_model not in ("deterministic", "exponential"):
            raise SimError(f"unknown block model {self.block_model!r}")
        if self.block_model == "exponential" and self.seed is None:
            raise SimError("the exponential block model needs a seed")
        if self.ticks_per_honest_block < 1:
            raise SimError("ticks_per_honest_block must be a positive integer")


@dataclass(frozen=True)
class RoundOutcome:
    t: int
    player: str
    action: Literal["fight", "quit"]
    depth: int = 0
    blocks_added: int = 0
    duration: object = 0


@dataclass
class EpisodeResult:
    success: bool
    duration_honest_block_times: object
    attacker_blocks: int
    realized_cost: object
    realized_revenue: object
    realized_net: object
    events: list = field(default_factory=list)
    rounds: list = field(default_factory=list)
    status: str = "decided"
    reveal_time: object = None
    payoff_A: object = None
    payoff_D: object = None
    convention: str = DOUBLE_SPEND_BLOCK_CONVENTION

    def to_dict(self) -> dict:
        out = {
            "success": self.success,
            "status": self.status,
            "duration_honest_block_times": format_number(self.duration_honest_block_times),
            "attacker_blocks": self.attacker_blocks,
            "realized_cost": format_number(self.realized_cost),
            "realized_revenue": format_number(self.realized_revenue),
            "realized_net": format_number(self.realized_net),
            "reveal_time": format_number(self.reveal_time),
            "events": [e.to_row() for e in self.events],
            "convention": self.convention,
        }
        if self.payoff_A is not None:
            out["payoff_A"] = format_number(self.payoff_A)
            out["payoff_D"] = format_number(self.payoff_D)
            out["rounds"] = [
                {
                    "t": r.t,
                    "player": r.player,
                    "action": r.action,
                    "depth": r.depth,
                    "blocks_added": r.blocks_added,
                    "duration": format_number(r.duration),
                }
                for r in self.rounds
            ]
        return out


# --- races ----------------------------------------------------------------------


@dataclass(frozen=True)
class _Race:
    decided: bool
    reveal_time: object
    canonical_len: int  # blocks orphaned
    fighter_len: int  # blocks added
    time_to_escrow_blocks: object  # when the fighter held `target` blocks


def _race_exponential(rng, beta: float, start_canonical: int, min_canonical: int, target: int) -> _Race:
    """Poisson race: honest blocks at rate 1, the fighter at rate ``beta``.

    Arrivals are drawn in growing chunks; each arrival is a fighter block with
    probability ``beta / (1 + beta)``.
    """
    total = 1.0 + beta
    p_fighter = beta / total
    t = 0.0
    canonical, fighter = start_canonical, 0
    t_target = None
    steps, chunk = 0, 64
    while steps < RUN_CAP:
        n = min(chunk, RUN_CAP - steps)
        times = t + np.cumsum(rng.exponential(1.0 / total, n))
        mine = rng.random(n) < p_fighter
        fighters = fighter + np.cumsum(mine)
        canon = canonical + np.cumsum(~mine)
        if t_target is None:
            hit = np.flatnonzero(mine & (fighters == target))
            if hit.size:
                t_target = float(times[hit[0]])
        won = np.flatnonzero((fighters > canon) & (canon >= min_canonical))
        if won.size:
            i = won[0]
            return _Race(True, float(times[i]), int(canon[i]), int(fighters[i]), t_target)
        t, fighter, canonical = float(times[-1]), int(fighters[-1]), int(canon[-1])
        steps += n
        chunk = min(chunk * 2, 1 << 16)
    return _Race(False, t, canonical, fighter, t_target)


def _race_deterministic(beta: Fraction, ticks: int, start_canonical: int, min_canonical: int, target: int) -> _Race:
    """Clocked race: by time ``now`` a branch with rate ``rate`` holds ``floor(rate * now)`` blocks."""
    num, den = beta.numerator, beta.denominator * ticks
    t_target = Fraction(target) / beta
    for tick in range(1, RUN_CAP + 1):
        fighter = num * tick // den
        canonical = start_canonical + tick // ticks
        if fighter > canonical and canonical >= min_canonical:
            return _Race(True, Fraction(tick, ticks), canonical, fighter, t_target if fighter >= target else None)
    fighter = num * RUN_CAP // den
    return _Race(False, Fraction(RUN_CAP, ticks), start_canonical + RUN_CAP // ticks, fighter,
                 t_target if fighter >= target else None)


def _rng(cfg: SimConfig, run_index: int):
    if cfg.block_model != "exponential":
        return None
    return np.random.default_rng([cfg.seed, run_index])


def _race(cfg: SimConfig, rng, start_canonical: int, min_canonical: int) -> _Race:
    e = cfg.econ.escrow_e
    if cfg.block_model == "exponential":
        return _race_exponential(rng, float(cfg.econ.beta), start_canonical, min_canonical, e)
    return _race_deterministic(cfg.econ.beta, cfg.ticks_per_honest_block, start_canonical, min_canonical, e)


def _timestamp(cfg: SimConfig, t) -> int:
    return cfg.start_time + int(round(float(t) * cfg.block_seconds))


# --- episodes -------------------------------------------------------------------


def run_attack_episode(cfg: SimConfig, run_index: int = 0) -> EpisodeResult:
    """One double-spend attack.

    In race mode ``duration_honest_block_times`` is the time the renter needs
    to mine its ``e`` blocks, the rental window the cost model prices;
    ``reveal_time`` is when the branch actually overtakes the public chain,
    which also waits for the escrow to pass. Realized costs in race mode pay
    rent until the reveal.
    """
    econ = cfg.econ
    e = econ.escrow_e
    if cfg.mode == "stylized":
        if econ.beta <= 1:
            raise MajorityRequired(econ.beta)
        cost = net_attack_cost(econ)
        event = ReorgEvent(
            chain_id=cfg.chain_id,
            timestamp=_timestamp(cfg, cost.duration_honest_block_times),
            height=cfg.fork_height + e,
            depth=e,
            blocks_added=e,
            conflicting_spend=True,
            value_usd=econ.tx_value_v,
            beneficiary=cfg.tags[0],
        )
        return EpisodeResult(
            success=True,
            duration_honest_block_times=cost.duration_honest_block_times,
            attacker_blocks=e,
            realized_cost=cost.rental_cost,
            realized_revenue=cost.mining_revenue,
            realized_net=cost.net_cost,
            events=[event],
            reveal_time=cost.duration_honest_block_times,
        )

    race = _race(cfg, _rng(cfg, run_index), 0, e)
    rate = (1 + econ.kappa_at_beta) * econ.beta * econ.n * econ.hash_cost_ch
    reward = (1 - econ.delta) * econ.block_reward_pb
    if cfg.block_model == "exponential":
        rate, reward = float(rate), float(reward)
    cost = rate * race.reveal_time
    if not race.decided:
        return EpisodeResult(False, race.time_to_escrow_blocks, race.fighter_len, cost, 0, cost, status="undecided", reveal_time=race.reveal_time)
    revenue = reward * race.fighter_len
    event = ReorgEvent(
        chain_id=cfg.chain_id,
        timestamp=_timestamp(cfg, race.reveal_time),
        height=cfg.fork_height + race.fighter_len,
        depth=race.canonical_len,
        blocks_added=race.fighter_len,
        conflicting_spend=True,
        value_usd=econ.tx_value_v,
        beneficiary=cfg.tags[0],
    )
    return EpisodeResult(
        success=True,
        duration_honest_block_times=race.time_to_escrow_blocks,
        attacker_blocks=race.fighter_len,
        realized_cost=cost,
        realized_revenue=revenue,
        realized_net=cost - revenue,
        events=[event],
        reveal_time=race.reveal_time,
    )


def _combined(sigma_a: StrategyProfile, sigma_d: StrategyProfile):
    def p(t):
        return (sigma_a if t % 2 == 0 else sigma_d).p(t)

    if sigma_a.tail == 1 and sigma_d.tail == 1:
        n = max(len(sigma_a), len(sigma_d))
        if not any(p(t) == 0 for t in range(n)):
            raise NonTerminatingProfile("neither player ever quits")
    return p


def run_retaliation_episode(
    cfg: SimConfig, sigma_a: StrategyProfile, sigma_d: StrategyProfile, run_index: int = 0
) -> EpisodeResult:
    """Play the retaliation game move by move, reorging the chain on every fight.

    A moves at even ``t`` (using ``sigma_a``), D at odd ``t`` (``sigma_d``).
    Every fight orphans the whole canonical branch back to the fork point, so
    reorg depths grow with each counterattack.
    """
    g = cfg.game
    if g is None:
        raise SimError("retaliation runs need game parameters")
    p = _combined(sigma_a, sigma_d)
    rng = np.random.default_rng([cfg.seed if cfg.seed is not None else 0, run_index])
    race_rng = _rng(cfg, run_index)
    e = cfg.econ.escrow_e
    c = g.c if g.exact else float(g.c)
    spent = {"A": 0 * c, "D": 0 * c}
    holder = "D"
    events, rounds = [], []
    clock = Fraction(0)
    canonical = 0
    t = 0
    while True:
        who = mover(t)
        prob = p(t)
        fights = prob == 1 or (prob > 0 and rng.random() < float(prob))
        if not fights:
            rounds.append(RoundOutcome(t, who, "quit"))
            break
        if t > RUN_CAP:
            raise NonTerminatingProfile("episode exceeded the move cap")
        if cfg.mode == "stylized":
            depth, added = e + t, e + t + 1
            dur = Fraction(added) / cfg.econ.beta
        else:
            race = _race(cfg, race_rng, canonical, e if t == 0 else 0)
            if not race.decided:
                raise SimError(f"race at t={t} undecided after {RUN_CAP} steps")
            depth, added, dur = race.canonical_len, race.fighter_len, race.reveal_time
        clock += Fraction(dur) if not isinstance(dur, float) else Fraction(repr(dur))
        events.append(
            ReorgEvent(
                chain_id=cfg.chain_id,
                timestamp=_timestamp(cfg, clock),
                height=cfg.fork_height + added,
                depth=depth,
                blocks_added=added,
                conflicting_spend=True,
                value_usd=_money(g.asset_value(t)),
                beneficiary=cfg.tags[0] if who == "A" else cfg.tags[1],
            )
        )
        rounds.append(RoundOutcome(t, who, "fight", depth, added, dur))
        spent[who] += c
        holder = who
        canonical = added
        t += 1
    quitter = mover(t)
    value = g.asset_value(t)
    pay = {"A": -spent["A"], "D": -spent["D"]}
    pay[holder] += value
    if quitter == "D":
        pay["D"] -= g.r if g.exact else float(g.r)
    return EpisodeResult(
        success=bool(events),
        duration_honest_block_times=clock,
        attacker_blocks=sum(r.blocks_added for r in rounds if r.player == "A"),
        realized_cost=spent["A"],
        realized_revenue=value if holder == "A" else 0 * c,
        realized_net=spent["A"] - (value if holder == "A" else 0),
        events=events,
        rounds=rounds,
        payoff_A=pay["A"],
        payoff_D=pay["D"],
        reveal_time=clock,
    )


def _money(x):
    if isinstance(x, float):
        return Fraction(format_number(x))
    return x


# --- batches and sweeps ---------------------------------------------------------


@dataclass(frozen=True)
class BatchSummary:
    runs: int
    successes: int
    undecided: int
    mean_duration: float
    se_duration: float
    mean_reveal_time: float
    mean_net: float

    def to_dict(self) -> dict:
        return {k: (format_number(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


def run_attack_batch(cfg: SimConfig, runs: int) -> tuple:
    results = [run_attack_episode(cfg, i) for i in range(runs)]
    done = [r for r in results if r.success]
    durs = np.array([float(r.duration_honest_block_times) for r in done])
    reveals = np.array([float(r.reveal_time) for r in done])
    nets = np.array([float(r.realized_net) for r in done])
    n = len(done)
    summary = BatchSummary(
        runs=runs,
        successes=n,
        undecided=sum(r.status == "undecided" for r in results),
        mean_duration=float(durs.mean()) if n else math.nan,
        se_duration=float(durs.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        mean_reveal_time=float(reveals.mean()) if n else math.nan,
        mean_net=float(nets.mean()) if n else math.nan,
    )
    return summary, results


SWEEP_COLUMNS = (
    "v",
    "c",
    "r",
    "decay",
    "T_A",
    "T_D",
    "d_last_mover",
    "linear_cond",
    "general_cond",
    "attack_occurs",
)
SIM_COLUMNS = ("sim_payoff_A", "sim_payoff_D")


def _bool(x) -> str:
    if x is None:
        return "n/a"
    return "true" if x else "false"


def sweep_row(g: GameParams, simulate: bool = False) -> dict:
    from .solver import backward_induction, reputation_safety

    be = g.break_even()
    safety = reputation_safety(g)
    eq = backward_induction(g)
    row = {
        "v": format_number(g.v),
        "c": format_number(g.c),
        "r": format_number(g.r),
        "decay": str(g.decay),
        "T_A": format_number(be.t_attacker),
        "T_D": format_number(be.t_defender),
        "d_last_mover": _bool(safety.d_last_mover),
        "linear_cond": _bool(safety.linear_condition),
        "general_cond": _bool(safety.general_condition),
        "attack_occurs": _bool(eq.attack_occurs),
    }
    if simulate:
        econ = EconParams(1, 1, 2, 1, g.v)
        res = run_retaliation_episode(SimConfig(econ=econ, game=g), eq.profile, eq.profile)
        row["sim_payoff_A"] = format_number(res.payoff_A)
        row["sim_payoff_D"] = format_number(res.payoff_D)
    return row


def _sweep_one(args):
    return sweep_row(*args)


def sweep(points: Sequence[GameParams], simulate: bool = False, jobs: int = 1) -> list:
    """Solve every grid point; output order follows ``points`` whatever ``jobs`` is."""
    work = [(g, simulate) for g in points]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, work, chunksize=16))
    return [_sweep_one(w) for w in work]


def sweep_csv(rows: Sequence[dict]) -> str:
    columns = list(SWEEP_COLUMNS)
    if rows and "sim_payoff_A" in rows[0]:
        columns += SIM_COLUMNS
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
