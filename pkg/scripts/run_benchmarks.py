#!/usr/bin/env python3
"""Run every bundled benchmark and summarize convergence and tip motion.

Equivalent to `se3shell bench all --quiet` plus a compact table; useful as a
smoke check after changes.
"""

import argparse
import sys
from pathlib import Path

from se3shell.outputs import run_scenario, tip_displacement
from se3shell.scenario import list_bundled, load_bundled, with_overrides


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="bench_out")
    ap.add_argument("--steps", type=int, default=None)
    ap.add_argument("--only", nargs="*", default=None,
                    help="subset of benchmark names")
    args = ap.parse_args()

    names = args.only or list_bundled()
    failures = []
    for name in names:
        cfg = with_overrides(load_bundled(name), steps=args.steps)
        report, model = run_scenario(cfg, Path(args.out) / name, quiet=True)
        tip = tip_displacement(model)
        status = "ok" if report.converged else "FAILED"
        iters = sum(r.iterations for r in report.steps)
        print(f"{name:30s} {status:6s} {report.wall_time:7.2f}s "
              f"{iters:4d} its  tip=({tip[0]:+.3e}, {tip[1]:+.3e}, {tip[2]:+.3e})")
        if not report.converged:
            failures.append(name)
    if failures:
        print("failed:", ", ".join(failures), file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
