#!/usr/bin/env python3
"""Run experiment configs (default: every file in configs/) and print a status line each.

Relative output paths in a config resolve against the current directory.
Exit status is 1 if any experiment fails.
"""

import argparse
import glob
import sys
import time

from mutualdim.experiments import ExperimentConfig, run_experiment


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="*", help="config files (default: configs/*.json)")
    ap.add_argument("--workers", type=int, help="override the worker count")
    args = ap.parse_args()
    paths = args.configs or sorted(glob.glob("configs/*.json"))
    failed = 0
    for path in paths:
        cfg = ExperimentConfig.load(path)
        if args.workers:
            cfg.workers = args.workers
        t0 = time.perf_counter()
        report = run_experiment(cfg)
        status = "PASS" if report.passed else "FAIL"
        failed += not report.passed
        print(f"{status}  {path}  [{cfg.config_hash()[:12]}]  {time.perf_counter() - t0:.1f}s  {report.checks}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
