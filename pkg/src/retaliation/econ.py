"""Attack-cost model for renting majority hashpower.

All money arithmetic is exact (``fractions.Fraction``). Under free entry the
honest hashpower is ``n = p_b / c_h``; a single attack rents ``beta * n`` for
``e / beta`` honest-block-times, earns ``e`` block rewards devalued by the
price impact, and therefore nets a cost of ``(kappa(beta) + delta) * e * p_b``.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from ._num import Number, as_fraction, format_param


class EconError(ValueError):
    """Invalid economic parameters."""


class MajorityRequired(EconError):
    """Attack operations need beta > 1."""

    def __init__(self, beta):
        super().__init__(f"majority required: beta must be > 1, got {beta}")


# --- market impact -----------------------------------------------------------


@dataclass(frozen=True)
class ConstantImpact:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))
        if self.value < 0:
            raise EconError("market impact must be >= 0")

    def __call__(self, beta: Number) -> Fraction:
        return self.value

    def __str__(self):
        return f"constant({format_param(self.value)})"


@dataclass(frozen=True)
class LinearImpact:
    """kappa(beta) = slope * beta."""

    slope: Fraction

    def __post_init__(self):
        object.__setattr__(self, "slope", as_fraction(self.slope))
        if self.slope < 0:
            raise EconError("market impact slope must be >= 0")

    def __call__(self, beta: Number) -> Fraction:
        return self.slope * as_fraction(beta)

    def __str__(self):
        return f"linear({format_param(self.slope)})"


@dataclass(frozen=True)
class TableImpact:
    """Step function through ``(beta, kappa)`` points.

    The value at ``beta`` is the one tabulated at the largest ``beta_i <= beta``;
    below the first point the impact is 0.
    """

    points: tuple

    def __post_init__(self):
        pts = tuple((as_fraction(b), as_fraction(k)) for b, k in self.points)
        if not pts:
            raise EconError("impact table needs at least one point")
        betas = [b for b, _ in pts]
        kappas = [k for _, k in pts]
        if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise EconError("impact table betas must be strictly increasing")
        if any(k < 0 for k in kappas) or any(k2 < k1 for k1, k2 in zip(kappas, kappas[1:])):
            raise EconError("impact table values must be >= 0 and weakly increasing")
        object.__setattr__(self, "points", pts)

    def __call__(self, beta: Number) -> Fraction:
        beta = as_fraction(beta)
        i = bisect.bisect_right([b for b, _ in self.points], beta)
        return Fraction(0) if i == 0 else self.points[i - 1][1]

    def __str__(self):
        return "table(" + ",".join(f"{format_param(b)}:{format_param(k)}" for b, k in self.points) + ")"


MarketImpactFn = Union[ConstantImpact, LinearImpact, TableImpact]

_IMPACT_RE = re.compile(r"^\s*(constant|linear|table)\s*\((.*)\)\s*$", re.I)


def parse_impact(text: str) -> MarketImpactFn:
    """Parse ``constant(0.05)``, ``linear(0.02)`` or ``table(1.5:0.01,2:0.05)``.

    A bare number is read as a constant impact.
    """
    m = _IMPACT_RE.match(text)
    if not m:
        try:
            return ConstantImpact(as_fraction(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise EconError(f"cannot parse market impact {text!r}") from exc
    kind, body = m.group(1).lower(), m.group(2)
    try:
        if kind == "constant":
            return ConstantImpact(as_fraction(body))
        if kind == "linear":
            return LinearImpact(as_fraction(body))
        pairs = []
        for item in body.split(","):
            b, k = item.split(":")
            pairs.append((b, k))
        return TableImpact(tuple(pairs))
    except (ValueError, ZeroDivisionError) as exc:
        raise EconError(f"cannot parse market impact {text!r}: {exc}") from exc


def check_impact_monotone(kappa: MarketImpactFn, betas: Sequence[Number] = None) -> None:
    """Sample kappa and raise if it is negative or decreasing anywhere."""
    if betas is None:
        betas = [Fraction(i, 4) for i in range(0, 41)]
    prev = None
    for b in betas:
        k = kappa(b)
        if k < 0:
            raise EconError(f"kappa({b}) = {k} < 0")
        if prev is not None and k < prev:
            raise EconError(f"kappa decreases at beta={b}")
        prev = k


# --- parameters and results --------------------------------------------------


@dataclass(frozen=True)
class EconParams:
    """Inputs to the attack-cost model.

    ``honest_hashpower_n=None`` means the free-entry value ``pb / ch``.
    """

    block_reward_pb: Fraction
    hash_cost_ch: Fraction
    beta: Fraction
    escrow_e: int
    tx_value_v: Fraction
    kappa: MarketImpactFn = field(default_factory=lambda: ConstantImpact(0))
    delta: Fraction = Fraction(0)
    honest_hashpower_n: Optional[Fraction] = None

    def __post_init__(self):
        for name in ("block_reward_pb", "hash_cost_ch", "beta", "tx_value_v", "delta"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.honest_hashpower_n is not None:
            object.__setattr__(self, "honest_hashpower_n", as_fraction(self.honest_hashpower_n))
            if self.honest_hashpower_n <= 0:
                raise EconError("honest hashpower n must be > 0")
        if isinstance(self.kappa, str):
            object.__setattr__(self, "kappa", parse_impact(self.kappa))
        elif not isinstance(self.kappa, (ConstantImpact, LinearImpact, TableImpact)):
            object.__setattr__(self, "kappa", ConstantImpact(self.kappa))
        if self.block_reward_pb <= 0:
            raise EconError("block reward pb must be > 0")
        if self.hash_cost_ch <= 0:
            raise EconError("hash cost ch must be > 0")
        if self.tx_value_v <= 0:
            raise EconError("transaction value v must be > 0")
        if self.beta < 0:
            raise EconError("beta must be >= 0")
        if not 0 <= self.delta <= 1:
            raise EconError("price decrease delta must lie in [0, 1]")
        e = self.escrow_e
        if isinstance(e, Fraction) and e.denominator == 1:
            e = int(e)
        if isinstance(e, bool) or not isinstance(e, int) or e < 1:
            raise EconError("escrow e must be a positive integer")
        object.__setattr__(self, "escrow_e", e)
        check_impact_monotone(self.kappa)

    @property
    def n(self) -> Fraction:
        if self.honest_hashpower_n is None:
            return free_entry_hashpower(self.block_reward_pb, self.hash_cost_ch)
        return self.honest_hashpower_n

    @property
    def kappa_at_beta(self) -> Fraction:
        return self.kappa(self.beta)


@dataclass(frozen=True)
class AttackCostBreakdown:
    rental_cost: Fraction
    mining_revenue: Fraction
    net_cost: Fraction
    duration_honest_block_times: Fraction


@dataclass(frozen=True)
class Profitability:
    profitable: bool
    profit: Fraction
    # None when kappa + delta == 0: no block reward makes the attack unprofitable.
    safe_pb_threshold: Optional[Fraction]

    @property
    def threshold_unbounded(self) -> bool:
        return self.safe_pb_threshold is None


# --- operations ---------------------------------------------------------------


def free_entry_hashpower(pb: Number, ch: Number) -> Fraction:
    """Equilibrium honest hashpower under free entry: ``pb / ch``."""
    pb, ch = as_fraction(pb), as_fraction(ch)
    if pb <= 0 or ch <= 0:
        raise EconError("pb and ch must both be > 0")
    return pb / ch


def net_attack_cost(params: EconParams) -> AttackCostBreakdown:
    if params.beta <= 1:
        raise MajorityRequired(params.beta)
    e = params.escrow_e
    k = params.kappa_at_beta
    rental = (1 + k) * e * params.n * params.hash_cost_ch
    revenue = (1 - params.delta) * e * params.block_reward_pb
    return AttackCostBreakdown(
        rental_cost=rental,
        mining_revenue=revenue,
        net_cost=rental - revenue,
        duration_honest_block_times=Fraction(e) / params.beta,
    )


def attack_profitability(params: EconParams) -> Profitability:
    """Profit of stealing ``v`` once, and the block reward that makes it unsafe.

    Zero profit is reported as not profitable; the raw profit is returned so
    callers can apply the other convention.
    """
    cost = net_attack_cost(params).net_cost
    profit = params.tx_value_v - cost
    friction = params.kappa_at_beta + params.delta
    threshold = None if friction == 0 else params.tx_value_v / (friction * params.escrow_e)
    return Profitability(profitable=profit > 0, profit=profit, safe_pb_threshold=threshold)
