"""Run every desk-scale experiment and write CSV/JSON results.

usage: python3 scripts/run_all_experiments.py [out_dir] [--seed N]
"""
import argparse
import json
import time

from poleshift import experiments as E

RUNS = [
    ("pole_decay", E.fig_pole_decay, False),
    ("numpoles", E.fig_numpoles, False),
    ("z_sweep", E.fig_z_sweep, False),
    ("compare", E.bench_compare, True),
    ("multi_rhs", E.bench_multi_rhs, True),
    ("scaling", E.bench_scaling, True),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", nargs="?", default="results")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for name, fn, seeded in RUNS:
        t0 = time.perf_counter()
        summary = fn(args.out_dir, **({"seed": args.seed} if seeded else {}))
        scalars = {k: v for k, v in summary.items() if not isinstance(v, list)}
        print(f"[{name}] {time.perf_counter() - t0:.1f}s {json.dumps(scalars)}")


if __name__ == "__main__":
    main()
