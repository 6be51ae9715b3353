"""Run the Monte-Carlo comparison and print the result table.

    python3 scripts/run_experiment.py --trials 1000 --out results.csv
"""

import argparse
import time

from ehsched.sim import ExperimentConfig, run_experiment, write_results


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=2013)
    p.add_argument("--levels", type=float, nargs="+", default=None)
    p.add_argument("--qos", choices=["none", "deadline", "buffer"], default="deadline")
    p.add_argument("--qos-param", type=float, default=0.5)
    p.add_argument("--c-max", type=float, default=2.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results.csv")
    args = p.parse_args()

    kw = dict(trials=args.trials, seed=args.seed, qos_kind=args.qos, qos_param=args.qos_param,
              c_max=args.c_max, workers=args.workers)
    if args.levels:
        kw["energy_levels"] = tuple(args.levels)
    config = ExperimentConfig(**kw)
    start = time.perf_counter()
    rows = run_experiment(config)
    write_results(rows, args.out)
    print(f"{'energy':>8} {'opt T':>8} {'opt %':>7} {'ebs T':>8} {'ebs %':>7} {'failed':>6}")
    for r in rows:
        print(f"{r.energy_level:8g} {r.opt_mean_T:8.4f} {r.opt_feasible_pct:7.1f} "
              f"{r.ebs_mean_T:8.4f} {r.ebs_feasible_pct:7.1f} {r.failures:6d}")
    print(f"{config.trials} trials per level in {time.perf_counter() - start:.1f} s, written to {args.out}")


if __name__ == "__main__":
    main()
