"""Command-line entry point.

Exit codes: 0 success, 2 infeasible (or failed validation), 1 bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

from .baseline import ebs_solve
from .io import InputError, dumps, load_scenario, load_schedule, outcome_to_dict
from .oracle import GridAlignmentError, OracleCapacityError, OracleConfig, dp_min_time
from .scheduler import Infeasible, Schedule, solve
from .sim import ExperimentConfig, run_experiment, write_results
from .validation import CONSTRAINT, validate

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_INPUT


def _human(outcome) -> str:
    if isinstance(outcome, Infeasible):
        q = "never (not enough energy in total)" if not math.isfinite(outcome.q) else f"t={outcome.q:.9g}"
        return (
            f"infeasible ({outcome.cause}): {outcome.required:.9g} bits required by {q}, "
            f"at most {outcome.achievable:.9g} achievable (checked from t={outcome.tau:.9g})"
        )
    lines = [f"T = {outcome.T:.12g}", "epochs (start, rate, length, overflow at end):"]
    for ep in outcome.epochs:
        lines.append(f"  {ep.tau:.9g}  {ep.rate:.9g}  {ep.length:.9g}  {ep.overflow_at_end:.9g}")
    if outcome.overflows:
        lines.append("overflows: " + ", ".join(f"{o:.9g} J at t={t:.9g}" for t, o in outcome.overflows))
    lines.append(f"energy spent = {outcome.energy_spent:.12g}")
    return "\n".join(lines)


def cmd_solve(args) -> int:
    try:
        sc = load_scenario(args.scenario)
    except InputError as exc:
        return _fail(str(exc))
    outcome = ebs_solve(sc) if args.solver == "ebs" else solve(sc)
    sys.stdout.write(dumps(outcome_to_dict(outcome)) if args.format == "json" else _human(outcome) + "\n")
    return EXIT_OK if isinstance(outcome, Schedule) else EXIT_INFEASIBLE


def cmd_validate(args) -> int:
    try:
        sc = load_scenario(args.scenario)
        schedule = load_schedule(args.schedule)
    except InputError as exc:
        return _fail(str(exc))
    report = validate(sc, schedule, args.tol)
    print(report.summary())
    bad = [c.name for c in report.failures if c.kind == CONSTRAINT]
    if bad:
        print("constraint checks failed: " + ", ".join(sorted(set(bad))))
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        sc = load_scenario(args.scenario)
        config = OracleConfig(args.dt, args.dquant, args.equant, args.max_states)
        res = dp_min_time(sc, config)
    except (InputError, GridAlignmentError) as exc:
        return _fail(str(exc))
    except OracleCapacityError as exc:
        return _fail(f"{exc} (try a larger --dt or --dquant)")
    except ValueError as exc:
        return _fail(str(exc))
    opt = solve(sc)
    if not res.feasible:
        print("oracle: infeasible")
        if isinstance(opt, Schedule):
            print(f"optimal solver: T = {opt.T:.12g} (oracle grid too coarse to find it)")
        return EXIT_INFEASIBLE
    print(f"oracle: T = {res.T:.12g}  (dt={config.dt:g}, dquant={config.dq:g}, states={res.states})")
    if isinstance(opt, Schedule):
        gap = res.T - opt.T
        print(f"optimal solver: T = {opt.T:.12g}, gap = {gap:.3g} ({100 * gap / opt.T:.3g}%)")
    else:
        print("optimal solver: infeasible")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        base = {}
        if args.config:
            with open(args.config) as fh:
                base = json.load(fh)
        if args.trials is not None:
            base["trials"] = args.trials
        if args.seed is not None:
            base["seed"] = args.seed
        if args.levels:
            base["energy_levels"] = args.levels
        if args.workers is not None:
            base["workers"] = args.workers
        config = ExperimentConfig.from_dict(base)
    except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        return _fail(f"bad experiment config: {exc}")
    rows = run_experiment(config)
    try:
        write_results(rows, args.out)
    except OSError as exc:
        return _fail(str(exc))
    failures = sum(r.failures for r in rows)
    print(f"wrote {len(rows)} rows to {args.out}" + (f" ({failures} failed trials)" if failures else ""))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ehsched", description="Minimum-completion-time scheduling for energy-harvesting transmitters.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="compute a schedule")
    s.add_argument("scenario")
    s.add_argument("--solver", choices=["optimal", "ebs"], default="optimal")
    s.add_argument("--format", choices=["human", "json"], default="human")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check a schedule against a scenario")
    v.add_argument("scenario")
    v.add_argument("schedule")
    v.add_argument("--tol", type=float, default=1e-6)
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("oracle", help="brute-force minimum time on a grid")
    o.add_argument("scenario")
    o.add_argument("--dt", type=float, default=0.01)
    o.add_argument("--dquant", type=float, default=0.0001, help="data quantum (bits)")
    o.add_argument("--equant", type=float, default=0.0, help="battery quantum (J); 0 keeps levels exact")
    o.add_argument("--max-states", type=int, default=50_000_000)
    o.set_defaults(func=cmd_oracle)

    m = sub.add_parser("simulate", help="Monte-Carlo comparison against the baseline")
    m.add_argument("--config", help="JSON file with ExperimentConfig fields")
    m.add_argument("--trials", type=int)
    m.add_argument("--seed", type=int)
    m.add_argument("--levels", type=float, nargs="+", help="total harvested energy per trial (J)")
    m.add_argument("--workers", type=int)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
