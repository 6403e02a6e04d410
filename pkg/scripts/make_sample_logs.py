"""Regenerate the synthetic reorg logs bundled in src/retaliation/data/.

The logs mimic reorg-tracker output: frequent depth-1/2 noise plus a handful
of deep reorgs carrying a conflicting spend. Target totals: LCC Jul 2019,
6 attacks, $50,000; BTG Jan 2020, 2 attacks, $70,000; BTG Feb 2020, 8 attacks,
$120,000 in retaliation episodes of lengths 4, 2 and 2.
"""

from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from retaliation.ingest import ReorgEvent, write_reorg_log

OUT = Path(__file__).resolve().parents[1] / "src" / "retaliation" / "data"


def ts(text):
    return int(datetime.fromisoformat(text).replace(tzinfo=timezone.utc).timestamp())


def noise(rng, chain, start, end, base_height, count):
    t0, t1 = ts(start), ts(end)
    times = np.sort(rng.integers(t0, t1, size=count))
    out = []
    for t in times:
        depth = int(rng.choice([1, 1, 1, 2]))
        height = base_height + (int(t) - t0) // 150
        out.append(ReorgEvent(chain, int(t), height, depth, depth, False))
    return out


def deep(chain, when, height, depth, usd, who, extra=1):
    return ReorgEvent(chain, ts(when), height, depth, depth + extra, True, usd, who)


def lcc_btg_jan(rng):
    events = noise(rng, "LCC", "2019-07-01T00:00:00", "2019-07-10T00:00:00", 1_150_000, 40)
    attacks = [
        ("2019-07-04T03:12:00", 1_151_730, 42, 8000),
        ("2019-07-04T19:40:00", 1_152_120, 58, 9000),
        ("2019-07-05T11:05:00", 1_152_530, 73, 7500),
        ("2019-07-06T02:30:00", 1_152_900, 61, 8500),
        ("2019-07-06T17:55:00", 1_153_270, 95, 9000),
        ("2019-07-07T08:20:00", 1_153_630, 88, 8000),
    ]
    events += [deep("LCC", w, h, d, usd, "lcc-attacker-1", extra=2) for w, h, d, usd in attacks]
    events += noise(rng, "BTG", "2020-01-20T00:00:00", "2020-01-27T00:00:00", 623_000, 12)
    events += [
        deep("BTG", "2020-01-23T14:10:00", 623_500, 15, 40000, "btg-jan-attacker"),
        deep("BTG", "2020-01-24T09:45:00", 623_620, 15, 30000, "btg-jan-attacker"),
    ]
    return sorted(events, key=lambda e: (e.timestamp, e.chain_id))


def btg_feb(rng):
    events = noise(rng, "BTG", "2020-02-06T00:00:00", "2020-02-13T00:00:00", 625_000, 15)
    seq = [
        ("2020-02-08T02:00:00", 625_300, 16, 20000, "btg-x"),
        ("2020-02-08T05:30:00", 625_318, 18, 15000, "btg-y"),
        ("2020-02-08T09:10:00", 625_337, 20, 15000, "btg-x"),
        ("2020-02-08T13:00:00", 625_358, 22, 10000, "btg-y"),
        ("2020-02-09T20:00:00", 625_900, 14, 17000, "btg-p"),
        ("2020-02-10T01:15:00", 625_916, 16, 13000, "btg-q"),
        ("2020-02-11T06:40:00", 626_500, 15, 16000, "btg-s"),
        ("2020-02-11T11:20:00", 626_517, 17, 14000, "btg-t"),
    ]
    events += [deep("BTG", w, h, d, usd, who) for w, h, d, usd, who in seq]
    return sorted(events, key=lambda e: (e.timestamp, e.chain_id))


def main():
    rng = np.random.default_rng(20200224)
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "reorgs_lcc_btg_jan2020.csv").write_text(write_reorg_log(lcc_btg_jan(rng)))
    (OUT / "reorgs_btg_feb2020.csv").write_text(write_reorg_log(btg_feb(rng)))


if __name__ == "__main__":
    main()
