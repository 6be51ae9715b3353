"""Independent checks of a schedule against a scenario.

Nothing here reuses the solver's bound machinery: the battery is replayed
from the packet list, departures come straight from the epochs. Findings are
split into constraint checks (any valid schedule passes) and optimality
checks (structural properties every minimum-time schedule has).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .scheduler import Scenario, Schedule

__all__ = ["Check", "ValidationReport", "validate", "CONSTRAINT", "OPTIMALITY"]

CONSTRAINT = "constraint"
OPTIMALITY = "optimality"
DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class Check:
    name: str
    kind: str
    passed: bool
    at: Optional[float] = None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, kind: str, passed: bool, at: Optional[float] = None, detail: str = "") -> None:
        self.checks.append(Check(name, kind, bool(passed), at, detail))

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def constraints_ok(self) -> bool:
        return all(c.passed for c in self.checks if c.kind == CONSTRAINT)

    @property
    def ok(self) -> bool:
        return not self.failures

    def names(self) -> set[str]:
        return {c.name for c in self.checks}

    def summary(self) -> str:
        lines = []
        for name in sorted(self.names()):
            group = [c for c in self.checks if c.name == name]
            bad = [c for c in group if not c.passed]
            if bad:
                first = bad[0]
                where = "" if first.at is None else f" at t={first.at:.9g}"
                lines.append(f"FAIL {name} ({len(bad)}/{len(group)}){where}: {first.detail}")
            else:
                lines.append(f"pass {name} ({len(group)})")
        return "\n".join(lines)


class _Profile:
    """Piecewise-linear departure curve and battery replay of a schedule."""

    def __init__(self, scenario: Scenario, schedule: Schedule):
        self.sc = scenario
        self.epochs = [ep for ep in schedule.epochs if ep.length > 0]
        self.starts = [ep.tau for ep in self.epochs]

    def rate_at(self, t: float, tol: float = 0.0) -> float:
        """Rate just after ``t`` (0 outside the schedule); ends within ``tol`` of ``t`` count as ``t``."""
        for ep in self.epochs:
            if ep.tau - tol <= t < ep.tau + ep.length - tol:
                return ep.rate
        return 0.0

    def departure(self, t: float) -> float:
        out = []
        for ep in self.epochs:
            if t <= ep.tau:
                break
            out.append(ep.rate * (min(t, ep.tau + ep.length) - ep.tau))
        return math.fsum(out)

    def spent(self, t: float) -> float:
        out = []
        for ep in self.epochs:
            if t <= ep.tau:
                break
            out.append(self.sc.model.power(ep.rate) * (min(t, ep.tau + ep.length) - ep.tau))
        return math.fsum(out)


def _data_left(sc: Scenario, t: float) -> float:
    return math.fsum(a for d, a in sc.data if d < t)


def _replay(sc: Scenario, prof: _Profile, checkpoints: list[float]):
    """Battery just before / after every checkpoint, and the overflows on the way."""
    before, after, overflows = {}, {}, []
    arrivals = dict(sc.energy)
    b = 0.0
    t_prev = 0.0
    for t in checkpoints:
        b -= prof.spent(t) - prof.spent(t_prev)
        before[t] = b
        if t in arrivals:
            b += arrivals[t]
            if b > sc.c_max:
                overflows.append((t, b - sc.c_max))
                b = sc.c_max
        after[t] = b
        t_prev = t
    return before, after, overflows


def validate(scenario: Scenario, schedule: Schedule, tol: float = DEFAULT_TOL) -> ValidationReport:
    sc = scenario
    rep = ValidationReport()
    tol_d = tol * max(1.0, sc.total_data)
    tol_e = tol * max(1.0, sc.total_energy)
    tol_t = tol * max(1.0, sc.horizon, schedule.T)
    prof = _Profile(sc, schedule)

    # structure
    t = 0.0
    for ep in schedule.epochs:
        rep.add("structure", CONSTRAINT, abs(ep.tau - t) <= tol_t and ep.length >= 0 and ep.rate >= 0, ep.tau,
                f"epoch (tau={ep.tau}, rate={ep.rate}, length={ep.length}) does not continue at {t}")
        t = ep.tau + ep.length
    rep.add("duration", CONSTRAINT, abs(t - schedule.T) <= tol_t, schedule.T, f"epochs end at {t}, T={schedule.T}")
    T = t

    events = sorted(set(sc.event_times()))

    def snap(x: float) -> float:
        # an epoch end within tolerance of an event is that event
        return min(events, key=lambda e: abs(e - x)) if any(abs(e - x) <= tol_t for e in events) else x

    T = snap(T)
    ends = [snap(ep.tau + ep.length) for ep in prof.epochs]
    checkpoints = sorted(set([0.0] + [e for e in events if e <= T] + ends))
    before, after, overflows = _replay(sc, prof, checkpoints)

    for c in checkpoints:
        rep.add("ecc", CONSTRAINT, before[c] >= -tol_e, c, f"battery {before[c]:.3g} J before t={c}")
    for c in checkpoints:
        d = prof.departure(c)
        rep.add("dcc", CONSTRAINT, d <= _data_left(sc, c) + tol_d, c,
                f"sent {d:.9g} bits but only {_data_left(sc, c):.9g} arrived")
    for q in sc.qos.times:
        need, d = sc.qos.eval(q), prof.departure(min(q, T))
        rep.add("qos", CONSTRAINT, d >= need - tol_d, q, f"sent {d:.9g} bits, {need:.9g} due")
    if sc.qos.base > tol_d:
        rep.add("qos", CONSTRAINT, False, 0.0, "requirement due at t=0")
    done = prof.departure(T)
    rep.add("completion", CONSTRAINT, abs(done - sc.total_data) <= tol_d, T,
            f"sent {done:.9g} of {sc.total_data:.9g} bits")
    recorded = [(e, o) for e, o in schedule.overflows if o > tol_e]
    actual = [(e, o) for e, o in overflows if o > tol_e]
    same = len(recorded) == len(actual) and all(
        abs(e1 - e2) <= tol_t and abs(o1 - o2) <= tol_e for (e1, o1), (e2, o2) in zip(recorded, actual)
    )
    rep.add("overflow-record", CONSTRAINT, same, None, f"recorded {recorded}, replay gives {actual}")

    # optimality structure
    rep.add("battery-empty-at-T", OPTIMALITY, abs(before[T]) <= tol_e, T, f"{before[T]:.3g} J left at T")
    # an overflow with data still queued is only acceptable when the battery
    # was already drained, i.e. the packet alone exceeded the free capacity
    queued_overflow = set()
    for e, o in actual:
        gap = _data_left(sc, e) - prof.departure(e)
        drained = before.get(e, math.inf) <= tol_e
        if gap > tol_d:
            queued_overflow.add(e)
        rep.add("overflow-buffer-empty", OPTIMALITY, gap <= tol_d or drained, e,
                f"{gap:.3g} bits waiting during a {o:.3g} J overflow that could have been smaller")
    data_times = {d for d, _ in sc.data}
    energy_times = {e for e, _ in sc.energy}
    qos_times = set(sc.qos.times)
    for prev, nxt in zip(prof.epochs, prof.epochs[1:]):
        tb = snap(prev.tau + prev.length)
        if abs(nxt.rate - prev.rate) <= tol * max(1.0, prev.rate):
            continue
        near = [e for e in events if abs(e - tb) <= tol_t]
        rep.add("rate-change-at-event", OPTIMALITY, bool(near), tb, "rate changes between events")
        if not near:
            continue
        te = near[0]
        d = prof.departure(tb)
        buffer_empty = d >= _data_left(sc, te) - tol_d
        battery_empty = before[tb] <= tol_e
        if nxt.rate > prev.rate:
            rep.add("increase-upper-touch", OPTIMALITY, buffer_empty or battery_empty, tb,
                    "rate increases while data and energy are both left")
        else:
            qos_tight = te in qos_times and d <= sc.qos.eval(te) + tol_d
            full = te in energy_times and after[tb] >= sc.c_max - tol_e
            rep.add("decrease-lower-touch", OPTIMALITY, qos_tight or full, tb,
                    "rate decreases with no QoS or battery-full constraint active")
    for e, o in actual:
        if e >= T - tol_t or e in queued_overflow or any(abs(e - d) <= tol_t for d in data_times):
            continue
        rep.add("overflow-then-idle", OPTIMALITY, prof.rate_at(e, tol_t) <= tol, e,
                f"rate {prof.rate_at(e):.3g} after an overflow with no data arriving")
    return rep
