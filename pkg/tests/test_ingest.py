import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from retaliation.ingest import (
    DOUBLE_SPEND,
    RANDOM,
    ParseError,
    ReorgEvent,
    classify_events,
    group_retaliation_episodes,
    parse_reorg_log,
    plot_rows,
    summarize,
    summary_csv,
    write_reorg_log,
)

from conftest import bundled_log

HEADER = "chain,timestamp,height,depth,blocks_added,conflicting_spend,value_usd,beneficiary\n"
F = Fraction


def ev(ts, depth=20, chain="X", who="", value=0, conflict=True):
    return ReorgEvent(chain, ts, 1000 + ts, depth, depth + 1, conflict, F(value), who)


def test_parse_basic_and_iso_timestamp():
    text = HEADER + "BTG,2020-01-23T12:00:00Z,100,15,16,true,40000,a\nBTG,1579780800,101,1,1,false,,\n"
    a, b = parse_reorg_log(text)
    assert a.timestamp == b.timestamp == 1579780800
    assert a.value_usd == 40000 and b.value_usd == 0 and b.beneficiary == ""


@pytest.mark.parametrize(
    "row, column",
    [
        ("BTG,1,100,0,1,true,0,\n", "depth"),
        ("BTG,1,100,x,1,true,0,\n", "depth"),
        ("BTG,1,100,2,2,maybe,0,\n", "conflicting_spend"),
        ("BTG,1,100,2,2,true,-5,\n", None),
        ("BTG,1,100,3,2,true,0,\n", None),
    ],
)
def test_parse_errors_are_positional(row, column):
    with pytest.raises(ParseError) as info:
        parse_reorg_log(HEADER + "BTG,1,99,1,1,false,0,\n" + row)
    assert info.value.row == 2
    assert info.value.column == column


def test_header_and_json_errors():
    with pytest.raises(ParseError):
        parse_reorg_log("chain,timestamp\nX,1\n")
    with pytest.raises(ParseError):
        parse_reorg_log("{}", "json")
    with pytest.raises(ParseError):
        parse_reorg_log(json.dumps([{"chain": "X"}]), "json")


def test_classification_threshold():
    events = [ev(0, 9), ev(1, 10), ev(2, 50, conflict=False)]
    assert classify_events(events) == [RANDOM, DOUBLE_SPEND, RANDOM]
    assert classify_events(events, require_conflict=False) == [RANDOM, DOUBLE_SPEND, DOUBLE_SPEND]
    with pytest.raises(ValueError):
        classify_events(events, depth_threshold=1)


def test_grouping_rules():
    h = 3600
    events = [ev(0, who="a"), ev(h, who="b"), ev(2 * h, who="a"), ev(3 * h, who="c"),  # c cannot join a/b
              ev(100 * h, who="a"), ev(101 * h, who="a"),  # same side twice: two episodes
              ev(200 * h), ev(201 * h)]  # untagged: merged by time, unverified
    eps = group_retaliation_episodes(events)
    assert [e.length for e in eps] == [3, 1, 1, 1, 2]
    assert eps[0].classification == "Retaliation" and eps[1].classification == "SingleAttack"
    assert eps[-1].alternation_verified is False and eps[0].alternation_verified


def test_bundled_lcc_btg_summary():
    events = parse_reorg_log(bundled_log("reorgs_lcc_btg_jan2020"))
    rows = summary_csv(summarize(events)).splitlines()
    assert rows[1:] == ["BTG,2020-01-23,2020-01-24,2,70000", "LCC,2019-07-04,2019-07-07,6,50000"]


def test_bundled_feb_episodes():
    events = parse_reorg_log(bundled_log("reorgs_btg_feb2020"))
    eps = group_retaliation_episodes(events)
    assert sorted(e.length for e in eps) == [2, 2, 4]
    assert sum(e.value_usd for e in events) == 120000


def test_summary_campaign_split():
    events = [ev(0, value=1), ev(10, value=2), ev(10**7, value=4)]
    assert [r.attack_count for r in summarize(events, split_gap_seconds=86400)] == [2, 1]
    assert [r.attack_count for r in summarize(events)] == [3]


def test_plot_rows():
    events = [ev(5, 3), ev(1, 30)]
    labels = classify_events(events)
    assert plot_rows(events, labels) == [(1001, 30, DOUBLE_SPEND), (1005, 3, RANDOM)]


# --- properties ---------------------------------------------------------------

events_st = st.lists(
    st.builds(
        lambda chain, ts, depth, extra, conflict, value, who: ReorgEvent(
            chain, ts, 500 + ts // 600, depth, depth + extra, conflict or value > 0, F(value), who
        ),
        st.sampled_from(["BTG", "LCC"]),
        st.integers(0, 10**6),
        st.integers(1, 40),
        st.integers(0, 3),
        st.booleans(),
        st.integers(0, 10**5),
        st.sampled_from(["", "a", "b", "c"]),
    ),
    max_size=30,
)


@given(events_st, st.integers(2, 40), st.integers(2, 40))
def test_classification_monotone_in_threshold(events, t1, t2):
    lo, hi = sorted((t1, t2))
    strict = classify_events(events, hi)
    loose = classify_events(events, lo)
    for s, l in zip(strict, loose):
        if s == DOUBLE_SPEND:
            assert l == DOUBLE_SPEND


@given(events_st)
def test_episodes_partition_double_spends(events):
    labels = classify_events(events)
    eps = group_retaliation_episodes(events, labels=labels)
    grouped = sorted(id(e) for ep in eps for e in ep.events)
    deep = sorted(id(e) for e, lab in zip(events, labels) if lab == DOUBLE_SPEND)
    assert grouped == deep


@given(events_st, st.randoms())
def test_summary_permutation_invariant(events, rnd):
    shuffled = list(events)
    rnd.shuffle(shuffled)
    assert summary_csv(summarize(events)) == summary_csv(summarize(shuffled))


@given(events_st)
def test_log_round_trip(events):
    for fmt in ("csv", "json"):
        text = write_reorg_log(events, fmt)
        assert parse_reorg_log(text, fmt) == events
        assert write_reorg_log(parse_reorg_log(text, fmt), fmt) == text
