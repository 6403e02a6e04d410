from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from retaliation.econ import (
    ConstantImpact,
    EconError,
    EconParams,
    LinearImpact,
    MajorityRequired,
    TableImpact,
    attack_profitability,
    free_entry_hashpower,
    net_attack_cost,
    parse_impact,
)

F = Fraction


def params(kappa=0, delta=0, e=6, pb=100000, ch=F(1, 1000), v=50000, beta=2, n=None):
    return EconParams(pb, ch, beta, e, v, ConstantImpact(kappa), delta, n)


@pytest.mark.parametrize(
    "pb, ch, expected",
    [(100000, F(1, 1000), 10**8), (7, 7, 1), (50, F(2, 1000), 25000)],
)
def test_free_entry_examples(pb, ch, expected):
    assert free_entry_hashpower(pb, ch) == expected


@pytest.mark.parametrize("pb, ch", [(0, 1), (1, 0), (-5, 1), (1, -1)])
def test_free_entry_rejects_nonpositive(pb, ch):
    with pytest.raises(EconError):
        free_entry_hashpower(pb, ch)


def test_zero_friction_costs_nothing():
    assert net_attack_cost(params(0, 0, e=11, pb=123)).net_cost == 0


def test_net_cost_worked_examples():
    # 0.05 + 0.05 = 0.1 of six block rewards of 100000
    assert net_attack_cost(params(F("0.05"), F("0.05"))).net_cost == 60000
    assert net_attack_cost(params(F("0.1"), 0, e=1, pb=1)).net_cost == F(1, 10)


def test_breakdown_components():
    b = net_attack_cost(params(F("0.05"), F("0.05")))
    # rent (1.05) * 6 * n * ch with n*ch = pb; revenue 0.95 * 6 * pb
    assert b.rental_cost == F(105, 100) * 6 * 100000
    assert b.mining_revenue == F(95, 100) * 6 * 100000
    assert b.net_cost == b.rental_cost - b.mining_revenue
    assert b.duration_honest_block_times == 3


def test_supplied_n_is_not_substituted():
    p = params(F("0.1"), 0, e=2, pb=100, ch=1, n=50)
    b = net_attack_cost(p)
    assert b.rental_cost == F(11, 10) * 2 * 50
    assert b.net_cost == b.rental_cost - 200


@pytest.mark.parametrize("beta", [0, F(1, 2), 1])
def test_majority_required(beta):
    with pytest.raises(MajorityRequired):
        net_attack_cost(params(beta=beta))
    with pytest.raises(MajorityRequired):
        attack_profitability(params(beta=beta))


def test_profitability_examples():
    p = attack_profitability(params(F("0.05"), F("0.05"), v=50000))
    assert (p.profitable, p.profit) == (False, -10000)
    assert p.safe_pb_threshold == F(50000) / (F(1, 10) * 6)

    boundary = attack_profitability(params(F("0.05"), F("0.05"), v=60000))
    assert (boundary.profitable, boundary.profit) == (False, 0)

    free = attack_profitability(params(0, 0, v=1))
    assert free.profitable and free.threshold_unbounded


def test_threshold_is_the_profitability_boundary():
    # at pb just above the threshold the attack stops paying
    base = params(F("0.02"), F("0.03"), e=6, v=90000)
    thr = attack_profitability(base).safe_pb_threshold
    above = params(F("0.02"), F("0.03"), e=6, v=90000, pb=thr + 1)
    below = params(F("0.02"), F("0.03"), e=6, v=90000, pb=thr - 1)
    assert not attack_profitability(above).profitable
    assert attack_profitability(below).profitable


def test_impact_functions():
    assert ConstantImpact(F("0.2"))(7) == F("0.2")
    assert LinearImpact(F("0.1"))(3) == F("0.3")
    t = TableImpact(((1, 0), (2, F("0.05")), (4, F("0.2"))))
    assert [t(b) for b in (F(1, 2), 1, 3, 4, 10)] == [0, 0, F("0.05"), F("0.2"), F("0.2")]
    with pytest.raises(EconError):
        TableImpact(((2, 0), (1, 1)))
    with pytest.raises(EconError):
        TableImpact(((1, F("0.5")), (2, F("0.1"))))
    with pytest.raises(EconError):
        ConstantImpact(-1)


def test_parse_impact_round_trip():
    for text in ("constant(0.05)", "linear(0.02)", "table(1.5:0.01,2:0.05)"):
        assert str(parse_impact(text)) == text
    assert parse_impact("0.3") == ConstantImpact(F("0.3"))
    with pytest.raises(EconError):
        parse_impact("cubic(2)")


@pytest.mark.parametrize(
    "field, value",
    [("pb", 0), ("ch", -1), ("v", 0), ("delta", F(3, 2)), ("delta", -1), ("e", 0), ("beta", -1)],
)
def test_param_validation(field, value):
    kw = dict(pb=1, ch=1, beta=2, e=1, v=1, delta=0)
    kw[field] = value
    with pytest.raises(EconError):
        EconParams(kw["pb"], kw["ch"], kw["beta"], kw["e"], kw["v"], ConstantImpact(0), kw["delta"])


# --- properties ---------------------------------------------------------------

fracs = st.fractions(min_value=0, max_value=1, max_denominator=1000)
money = st.fractions(min_value=F(1, 100), max_value=10**6, max_denominator=100)
escrow = st.integers(min_value=1, max_value=100)


@given(fracs, fracs, escrow, money)
def test_net_cost_formula_and_sign(k, d, e, pb):
    cost = net_attack_cost(params(k, d, e=e, pb=pb)).net_cost
    assert cost == (k + d) * e * pb
    assert cost >= 0
    assert (cost == 0) == (k + d == 0)


@given(fracs, fracs, escrow, money, st.sampled_from(["kappa", "delta", "e", "pb"]))
def test_net_cost_monotone(k, d, e, pb, which):
    base = dict(kappa=k, delta=d, e=e, pb=pb)
    bumped = dict(base)
    if which in ("kappa", "delta"):
        bumped[which] = min(F(1), bumped[which] + F(1, 7))
    elif which == "e":
        bumped["e"] += 1
    else:
        bumped["pb"] *= 2
    assert net_attack_cost(params(**bumped)).net_cost >= net_attack_cost(params(**base)).net_cost


@given(money, money, st.fractions(min_value=F(1, 100), max_value=100, max_denominator=100))
def test_free_entry_proportional(pb, ch, a):
    assert free_entry_hashpower(a * pb, ch) == a * free_entry_hashpower(pb, ch)


@given(fracs, fracs, escrow, money, money, money)
def test_profitability_monotone_in_value(k, d, e, pb, v1, v2):
    lo, hi = sorted((v1, v2))
    if attack_profitability(params(k, d, e=e, pb=pb, v=lo)).profitable:
        assert attack_profitability(params(k, d, e=e, pb=pb, v=hi)).profitable
