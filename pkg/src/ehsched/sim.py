"""Monte-Carlo comparison of the optimal scheduler and the empty-buffers baseline.

Every trial draws one random profile (arrival times and relative packet
sizes) from its own counter-based stream, then rescales the energy packets to
each level of the sweep. Trials are therefore paired across levels and
independent of execution order.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .baseline import ebs_solve
from .power_rate import model_from_dict
from .scheduler import Scenario, Schedule, solve

__all__ = [
    "ExperimentConfig",
    "TrialResult",
    "ResultRow",
    "trial_rng",
    "generate_scenario",
    "random_grid_scenario",
    "run_trials",
    "aggregate",
    "run_experiment",
    "write_results",
    "CSV_HEADER",
]

CSV_HEADER = ["energy_level", "opt_mean_T", "opt_feasible_pct", "ebs_mean_T", "ebs_feasible_pct"]


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int = 1000
    seed: int = 2013
    energy_levels: tuple[float, ...] = (1.0, 1.5, 2.0, 3.0, 4.0, 6.0)
    n_data: int = 3
    n_energy: int = 3
    horizon: float = 1.0
    data_total: float = 1.0
    qos_kind: str = "deadline"
    # deadline in seconds for "deadline", queue size in bits for "buffer"
    qos_param: float = 0.5
    c_max: float = 2.0
    model: dict = field(default_factory=lambda: {"kind": "shannon", "params": {"bandwidth": 1.0, "noise_power": 1.0}})
    workers: int = 1

    def __post_init__(self):
        if self.trials <= 0:
            raise ValueError("trials must be positive")
        if not self.energy_levels:
            raise ValueError("energy sweep is empty")
        if any(not e > 0 for e in self.energy_levels):
            raise ValueError("energy levels must be positive")
        if self.n_data < 1 or self.n_energy < 1:
            raise ValueError("need at least one data and one energy packet")
        if not (self.horizon > 0 and self.data_total > 0 and self.c_max > 0):
            raise ValueError("horizon, data_total and c_max must be positive")
        if self.qos_kind not in ("none", "deadline", "buffer"):
            raise ValueError(f"unknown QoS kind {self.qos_kind!r}")
        model_from_dict(self.model)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "energy_levels" in d:
            d["energy_levels"] = tuple(float(x) for x in d["energy_levels"])
        return cls(**d)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["energy_levels"] = list(self.energy_levels)
        return out


@dataclass(frozen=True)
class TrialResult:
    trial: int
    energy_level: float
    opt_T: float
    ebs_T: float
    error: Optional[str] = None

    @property
    def opt_feasible(self) -> bool:
        return math.isfinite(self.opt_T)

    @property
    def ebs_feasible(self) -> bool:
        return math.isfinite(self.ebs_T)


@dataclass(frozen=True)
class ResultRow:
    energy_level: float
    opt_mean_T: float
    opt_feasible_pct: float
    ebs_mean_T: float
    ebs_feasible_pct: float
    trials: int = 0
    failures: int = 0


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def generate_scenario(rng: np.random.Generator, config: ExperimentConfig, energy_level: float) -> Scenario:
    """Uniform arrival times on [0, horizon]; energies rescaled to ``energy_level``.

    Draw order is fixed, so the same stream gives the same profile at every level.
    """
    h = config.horizon
    e_times = np.concatenate([[0.0], rng.uniform(0.0, h, config.n_energy - 1)])
    e_raw = rng.uniform(0.0, 1.0, config.n_energy)
    d_times = rng.uniform(0.0, h, config.n_data)
    d_raw = rng.uniform(0.0, 1.0, config.n_data)
    e_amounts = e_raw / math.fsum(e_raw) * energy_level
    d_amounts = d_raw / math.fsum(d_raw) * config.data_total
    qos = None
    if config.qos_kind == "deadline":
        qos = {"kind": "deadline", "params": {"theta": config.qos_param}}
    elif config.qos_kind == "buffer":
        qos = {"kind": "buffer", "params": {"beta": config.qos_param}}
    return Scenario.build(
        list(zip(e_times.tolist(), e_amounts.tolist())),
        list(zip(d_times.tolist(), d_amounts.tolist())),
        config.c_max,
        model_from_dict(config.model),
        qos,
    )


def random_grid_scenario(
    rng: np.random.Generator,
    max_energy: int = 3,
    max_data: int = 3,
    max_qos: int = 2,
    horizon: float = 2.0,
    grid: float = 0.1,
) -> Scenario:
    """Small scenario with times on a ``grid`` and amounts in hundredths.

    QoS requirements never exceed the data that has arrived strictly before
    they are due, so infeasibility only ever comes from energy.
    """
    steps = int(round(horizon / grid))

    def t_of(i) -> float:
        return round(int(i) * grid, 10)

    n_e = int(rng.integers(1, max_energy + 1))
    n_d = int(rng.integers(1, max_data + 1))
    n_q = int(rng.integers(0, max_qos + 1))
    energy = [(0.0, int(rng.integers(1, 301)) / 100)]
    energy += [(t_of(i), int(rng.integers(1, 301)) / 100) for i in rng.integers(1, steps + 1, n_e - 1)]
    data = [(t_of(i), int(rng.integers(1, 151)) / 100) for i in rng.integers(0, steps + 1, n_d)]
    c_max = int(rng.integers(20, 401)) / 100
    arrived = Scenario.build(energy, data, c_max).data_curve
    jumps, due = [], 0
    for q in sorted({t_of(i) for i in rng.integers(1, steps + 1, n_q)}):
        room = int(round(arrived.eval(q, "left") * 100)) - due
        if room > 0:
            amount = int(rng.integers(1, room + 1))
            jumps.append([q, amount / 100])
            due += amount
    return Scenario.build(energy, data, c_max, qos={"kind": "explicit", "params": {"jumps": jumps}})


def _completion(outcome) -> float:
    return outcome.T if isinstance(outcome, Schedule) else math.inf


def _run_one(args) -> TrialResult:
    config, trial, level = args
    try:
        sc = generate_scenario(trial_rng(config.seed, trial), config, level)
        return TrialResult(trial, level, _completion(solve(sc)), _completion(ebs_solve(sc)))
    except Exception as exc:  # recorded as a failed trial, never dropped
        return TrialResult(trial, level, math.nan, math.nan, f"{type(exc).__name__}: {exc}")


def run_trials(config: ExperimentConfig) -> list[TrialResult]:
    jobs = [(config, i, level) for level in config.energy_levels for i in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return list(pool.map(_run_one, jobs, chunksize=64))
    return [_run_one(j) for j in jobs]


def aggregate(results: Sequence[TrialResult], config: ExperimentConfig) -> list[ResultRow]:
    """Mean T / horizon over trials where the optimal solver succeeds, and feasibility percentages."""
    rows = []
    for level in sorted(config.energy_levels):
        group = [r for r in results if r.energy_level == level]
        ok = [r for r in group if r.error is None]
        paired = [r for r in ok if r.opt_feasible]
        ebs_ok = [r for r in paired if r.ebs_feasible]
        n = len(group)
        rows.append(
            ResultRow(
                level,
                math.fsum(r.opt_T for r in paired) / len(paired) / config.horizon if paired else math.nan,
                100.0 * len(paired) / n,
                math.fsum(r.ebs_T for r in ebs_ok) / len(ebs_ok) / config.horizon if ebs_ok else math.nan,
                100.0 * sum(r.ebs_feasible for r in ok) / n,
                n,
                n - len(ok),
            )
        )
    return rows


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    return aggregate(run_trials(config), config)


def write_results(rows: Sequence[ResultRow], path) -> None:
    if not rows:
        raise ValueError("no result rows to write")
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([f"{getattr(r, k):.12g}" for k in CSV_HEADER])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
