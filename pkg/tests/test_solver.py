import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from retaliation.decay import Geometric, Linear, Table
from retaliation.game import GameParams, StrategyProfile, paper_spe_profile, truncation_horizon
from retaliation.solver import (
    SolverError,
    backward_induction,
    brute_force_equilibrium,
    last_profitable_mover,
    one_deviation_check,
    reputation_safety,
)

from oracles import linear_phi, spe_by_recursion

F = Fraction


def test_worked_example(worked_game):
    res = backward_induction(worked_game)
    assert res.profile.probs == tuple(map(F, (0, 1, 0, 1, 0, 1, 0, 0)))
    assert not res.attack_occurs
    assert (res.root_outcome.payoff_A, res.root_outcome.payoff_D) == (0, 10000)
    assert res.root_outcome.quitter == "A" and res.root_outcome.time_t == 0
    assert res.node_values[0] == (0, 10000)


def test_no_attack_profile_is_also_an_spe_at_the_tie(worked_game):
    # at t=7 D is exactly indifferent: phi(8) v - c + r == 0
    assert one_deviation_check(worked_game, paper_spe_profile(worked_game)).is_spe
    assert one_deviation_check(worked_game, backward_induction(worked_game).profile).is_spe


def test_attack_example(attack_game):
    res = backward_induction(attack_game)
    assert res.attack_occurs
    assert res.root_outcome.quitter == "D" and res.root_outcome.time_t == 1
    assert (res.root_outcome.payoff_A, res.root_outcome.payoff_D) == (100, -200)


def test_brute_force_matches_on_examples(worked_game, attack_game):
    for g in (worked_game, attack_game, GameParams(10000, 4000, 2000, Geometric(F(1, 10)))):
        bf = brute_force_equilibrium(g)
        bi = backward_induction(g)
        h = truncation_horizon(g)
        assert bf.profile.probs == bi.profile.probs[: h + 1]
        assert math.isclose(float(bf.root_outcome.payoff_A), float(bi.root_outcome.payoff_A), abs_tol=1e-9)


def test_brute_force_limits():
    g = GameParams(10000, 100, 5000, Linear(F(1, 100)))
    with pytest.raises(SolverError):
        brute_force_equilibrium(g)
    with pytest.raises(SolverError):
        brute_force_equilibrium(g, max_horizon=20)


def test_one_deviation_flags_a_bad_profile(worked_game):
    # A attacks and D folds at once: D gains by fighting back at t=1
    report = one_deviation_check(worked_game, StrategyProfile((1,)))
    assert not report.is_spe
    first = report.deviations[0]
    assert (first.t, first.player, first.improving_p) == (1, "D", 1)
    assert report.at("A") == [] or report.at("A")[0].t > 1


def test_last_mover(worked_game):
    assert last_profitable_mover(worked_game) == "D"
    # r small: T_D just above T_A with A's even step last
    g = GameParams(10000, 4000, 500, Linear(F(1, 10)))
    assert last_profitable_mover(g) == "A"
    assert last_profitable_mover(GameParams(10000, 4000, 5000, Geometric(F(1, 10)))) == "D"


def test_reputation_safety(worked_game):
    rs = reputation_safety(worked_game)
    assert rs.linear_condition and rs.general_condition and rs.d_last_mover
    assert rs.general_threshold == 1000 and not rs.clamped
    geo = reputation_safety(GameParams(10000, 4000, 2000, Geometric(F(1, 10))))
    assert geo.linear_condition is None
    assert math.isclose(geo.general_threshold, 4000 - 3600, rel_tol=1e-9)
    clamp = reputation_safety(GameParams(10000, 500, 2000, Linear(F(1, 10))))
    assert clamp.clamped and clamp.general_threshold == 500


def test_table_decay_solves():
    g = GameParams(100, 30, 10, Table((1, F(9, 10), F(7, 10), F(4, 10), F(2, 10), 0)))
    bi = backward_induction(g)
    assert bi.profile.probs[: len(brute_force_equilibrium(g).profile)] == brute_force_equilibrium(g).profile.probs


# --- properties ---------------------------------------------------------------

games = st.builds(
    lambda v, cr, rr, g: GameParams(v, v * cr, v * rr, Linear(g)),
    st.integers(100, 10**5),
    st.fractions(min_value=F(1, 20), max_value=F(19, 20), max_denominator=20),
    st.fractions(min_value=F(1, 100), max_value=2, max_denominator=100),
    st.sampled_from([F(1, 10), F(1, 5), F(1, 4), F(1, 2), F(1, 8)]),
)


@settings(max_examples=150, deadline=None)
@given(games)
def test_bi_matches_recursive_oracle(g):
    depth = math.ceil(1 / g.decay.gamma) + 2  # beyond this nobody wants to fight
    ref_profile, ref_root = spe_by_recursion(g.v, g.c, g.r, lambda s: linear_phi(g.decay.gamma, s), depth)
    res = backward_induction(g)
    n = len(res.profile)
    assert list(res.profile.probs) == ref_profile[:n]
    assert (res.root_outcome.payoff_A, res.root_outcome.payoff_D) == ref_root


@settings(max_examples=100, deadline=None)
@given(games)
def test_bi_profile_passes_one_deviation(g):
    assert one_deviation_check(g, backward_induction(g).profile).is_spe


@settings(max_examples=100, deadline=None)
@given(games)
def test_reputation_above_gamma_v_prevents_attack(g):
    if g.r > g.decay.gamma * g.v:
        assert not backward_induction(g).attack_occurs


@settings(max_examples=100, deadline=None)
@given(games, st.fractions(min_value=0, max_value=5, max_denominator=10))
def test_monotone_in_reputation(g, bump):
    """Raising r never turns a deterred attack into an attack."""
    higher = GameParams(g.v, g.c, g.r + bump * g.v, g.decay)
    if not backward_induction(g).attack_occurs:
        assert not backward_induction(higher).attack_occurs
