"""Compare the solver with the grid oracle on seeded random scenarios.

    python3 scripts/oracle_sweep.py --count 200 --refine 1
"""

import argparse
import time

from ehsched import OracleConfig, Schedule, dp_min_time, solve
from ehsched.sim import random_grid_scenario, trial_rng


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--seed", type=int, default=20130)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--dquant", type=float, default=0.0001)
    p.add_argument("--refine", type=int, default=1, help="number of halvings of dt and dquant")
    args = p.parse_args()

    configs = [OracleConfig(args.dt, args.dquant)]
    for _ in range(args.refine):
        configs.append(configs[-1].refined())
    start = time.perf_counter()
    gaps = [[] for _ in configs]
    disagree = 0
    for i in range(args.count):
        sc = random_grid_scenario(trial_rng(args.seed, i))
        out = solve(sc)
        res = [dp_min_time(sc, c) for c in configs]
        if isinstance(out, Schedule):
            for g, r in zip(gaps, res):
                g.append((r.T - out.T) / out.T)
        disagree += isinstance(out, Schedule) != res[0].feasible
    for c, g in zip(configs, gaps):
        g.sort()
        print(f"dt={c.dt:g} dq={c.dq:g}: {len(g)} feasible, median gap {100 * g[len(g) // 2]:.4f}%, "
              f"worst {100 * g[-1]:.4f}%, min {100 * g[0]:.2e}%")
    print(f"feasibility verdicts differ on {disagree}/{args.count}; {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
