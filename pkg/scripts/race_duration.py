"""Monte Carlo attack durations in the block race.

For each (beta, e) the renter mines e blocks at rate beta against an honest
chain at rate 1. Reports the mean time to mine the e blocks (the rental
window priced by the cost model, expected e/beta) and the mean time until the
branch actually overtakes the public chain after the escrow has passed.
"""

import argparse
import csv
import sys
from fractions import Fraction

from retaliation.econ import EconParams
from retaliation.sim import SimConfig, run_attack_batch


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--betas", default="1.5,2,3,5")
    ap.add_argument("--escrows", default="1,6,12")
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["beta", "e", "runs", "expected_duration", "mean_duration", "se", "mean_reveal_time"])
    for b in args.betas.split(","):
        for e in args.escrows.split(","):
            beta, e = Fraction(b), int(e)
            econ = EconParams(1, 1, beta, e, 1)
            cfg = SimConfig(econ=econ, mode="race", block_model="exponential", seed=args.seed)
            s, _ = run_attack_batch(cfg, args.runs)
            out.writerow([b, e, s.runs, f"{float(e / beta):.4f}", f"{s.mean_duration:.4f}",
                          f"{s.se_duration:.4f}", f"{s.mean_reveal_time:.4f}"])


if __name__ == "__main__":
    main()
