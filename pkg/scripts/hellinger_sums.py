#!/usr/bin/env python3
"""Partial Hellinger sums for several rho schedules, as plot-ready CSV.

Columns: family, n, partial_sum, verdict. Rows are taken on a log-spaced grid of n.
"""

import argparse
import csv
import sys

import numpy as np

from mutualdim.kakutani import classify_schedule
from mutualdim.measures import RhoSchedule

SCHEDULES = {
    "const_0.1": RhoSchedule.const(0.1),
    "inv_sqrt_2": RhoSchedule.inv_sqrt(2.0),
    "harmonic_1": RhoSchedule.harmonic(1.0),
    "geometric_0.5_0.9": RhoSchedule.geometric(0.5, 0.9),
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-N", type=int, default=10**6)
    ap.add_argument("--points", type=int, default=60)
    ap.add_argument("-o", "--output", help="CSV path (default: stdout)")
    args = ap.parse_args()
    grid = np.unique(np.geomspace(1, args.N, args.points).astype(np.int64))
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    wr = csv.writer(out, lineterminator="\n")
    wr.writerow(["family", "n", "partial_sum", "verdict"])
    for label, sched in SCHEDULES.items():
        v = classify_schedule(sched, N=args.N)
        for n in grid.tolist():
            wr.writerow([label, n, repr(float(v.partial_sums[n - 1])), v.tag])
    if args.output:
        out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
