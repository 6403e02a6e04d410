"""Where does retaliation deter the attack?

Solves a grid of linear-decay games over c/v and r/(gamma v) and writes one
CSV row per game, plus a text map of attack (X) vs no attack (.) to stderr.

    python scripts/reputation_grid.py --v 10000 --gamma 0.1 --out grid.csv
"""

import argparse
import sys
from fractions import Fraction

from retaliation.decay import Linear
from retaliation.game import GameParams
from retaliation.sim import sweep, sweep_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--v", type=Fraction, default=Fraction(10000))
    ap.add_argument("--gamma", type=Fraction, default=Fraction(1, 10))
    ap.add_argument("--steps", type=int, default=20, help="grid resolution on each axis")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args(argv)

    ratios = [Fraction(i, args.steps) for i in range(1, args.steps)]
    reps = [Fraction(2 * i, args.steps) for i in range(1, args.steps + 1)]  # r / (gamma v) in (0, 2]
    games = [
        GameParams(args.v, cr * args.v, rr * args.gamma * args.v, Linear(args.gamma))
        for rr in reps
        for cr in ratios
    ]
    rows = sweep(games, jobs=args.jobs)
    text = sweep_csv(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    width = len(ratios)
    print("r/(gamma v) down, c/v across; X = attack", file=sys.stderr)
    for i, rr in enumerate(reversed(reps)):
        chunk = rows[(len(reps) - 1 - i) * width:(len(reps) - i) * width]
        marks = "".join("X" if row["attack_occurs"] == "true" else "." for row in chunk)
        print(f"{float(rr):5.2f} {marks}", file=sys.stderr)


if __name__ == "__main__":
    main()
