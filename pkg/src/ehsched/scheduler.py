"""Offline minimum-completion-time scheduler.

Each iteration fixes one constant-rate epoch. The origin is then moved to the
end of that epoch (time shifted by its length, data by the bits it carried,
energy by what it spent plus any overflow) and the same three steps run again:

* ``check_solution`` - is some QoS requirement already out of reach?
* ``check_finish``   - can everything left go out in one even-power epoch?
* ``get_epoch``      - otherwise pick the next epoch (``minT``/``minEnergy``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

from .curves import EnergyTimeline, Staircase, coalesce, qos_buffer, qos_deadline, time_tolerance
from .mapping import (
    BoundPair,
    RateBounds,
    battery_mapping,
    data_in_crossing,
    emin_mapping,
    line_feasible,
    merge_bounds,
    rate_bounds,
)
from .power_rate import NoSolutionError, PowerRateModel, Shannon, even_allocation, max_bits

__all__ = [
    "MIN_T",
    "MIN_ENERGY",
    "SolverError",
    "Scenario",
    "IterationState",
    "Epoch",
    "Finished",
    "Schedule",
    "Infeasible",
    "initial_state",
    "build_bounds",
    "check_solution",
    "check_finish",
    "get_epoch",
    "advance",
    "iterate",
    "deadline_bounds",
    "run_to_deadline",
    "solve",
]

MIN_T = "minT"
MIN_ENERGY = "minEnergy"


class SolverError(RuntimeError):
    """Internal inconsistency: the solver produced something impossible."""


@dataclass(frozen=True)
class Scenario:
    """Energy packets, data packets, QoS minimum departure, battery and g(.)."""

    energy: tuple[tuple[float, float], ...]
    data: tuple[tuple[float, float], ...]
    qos: Staircase
    c_max: float
    model: PowerRateModel = Shannon()
    qos_spec: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.c_max > 0:
            raise ValueError("battery capacity must be positive")
        if not self.energy or self.energy[0][0] != 0:
            raise ValueError("the first energy arrival must be at t=0")
        if not self.data:
            raise ValueError("scenario has no data packets")

    @classmethod
    def build(
        cls,
        energy: Sequence[tuple[float, float]],
        data: Sequence[tuple[float, float]],
        c_max: float,
        model: PowerRateModel = Shannon(),
        qos: Union[None, Staircase, dict] = None,
    ) -> "Scenario":
        """Coalesce simultaneous arrivals and turn a QoS description into a curve.

        ``qos`` is ``None``, a ready :class:`Staircase`, or a dict
        ``{"kind": "explicit"|"deadline"|"buffer", "params": {...}}``.
        """
        for t, a in list(energy) + list(data):
            if t < 0 or not a > 0:
                raise ValueError(f"bad packet ({t!r}, {a!r}): times must be >= 0 and amounts > 0")
        horizon = max([t for t, _ in energy] + [t for t, _ in data] + [0.0])
        eps = time_tolerance(horizon)
        e = coalesce(energy, eps)
        if not e or e[0][0] > eps:
            raise ValueError("the first energy arrival must be at t=0")
        e[0] = (0.0, e[0][1])
        d = coalesce(data, eps)
        d_curve = Staircase.from_jumps(d)
        spec = None
        if qos is None:
            curve = Staircase()
        elif isinstance(qos, Staircase):
            curve = qos
        else:
            spec = qos
            curve = _qos_curve(qos, d_curve, eps)
        return cls(tuple(e), tuple(d), curve, float(c_max), model, spec)

    @property
    def data_curve(self) -> Staircase:
        return Staircase.from_jumps(self.data)

    @property
    def timeline(self) -> EnergyTimeline:
        return EnergyTimeline(self.energy)

    @property
    def total_data(self) -> float:
        return math.fsum(a for _, a in self.data)

    @property
    def total_energy(self) -> float:
        return math.fsum(a for _, a in self.energy)

    @property
    def horizon(self) -> float:
        ts = [t for t, _ in self.energy] + [t for t, _ in self.data] + list(self.qos.times)
        return max(ts)

    @property
    def eps_t(self) -> float:
        return time_tolerance(self.horizon)

    @property
    def tol_data(self) -> float:
        return 1e-9 * max(1.0, self.total_data)

    @property
    def tol_energy(self) -> float:
        return 1e-9 * max(1.0, self.total_energy, self.c_max)

    def event_times(self) -> list[float]:
        return sorted(set(t for t, _ in self.energy) | set(t for t, _ in self.data) | set(self.qos.times))

    def with_energy(self, energy: Sequence[tuple[float, float]]) -> "Scenario":
        return replace(self, energy=tuple(energy))

    def with_qos(self, qos: Staircase) -> "Scenario":
        return replace(self, qos=qos, qos_spec=None)


def _qos_curve(spec: dict, data: Staircase, eps: float) -> Staircase:
    kind = spec.get("kind")
    params = spec.get("params", {}) or {}
    if kind == "explicit":
        return Staircase.from_jumps([(float(t), float(q)) for t, q in params.get("jumps", [])], eps=eps)
    if kind == "deadline":
        theta = params.get("theta")
        n = len(data.times) + (1 if data.base > 0 else 0)
        if isinstance(theta, (int, float)):
            theta = [float(theta)] * n
        return qos_deadline(data, [float(x) for x in theta], eps)
    if kind == "buffer":
        return qos_buffer(data, float(params["beta"]))
    if kind in (None, "none"):
        return Staircase()
    raise ValueError(f"unknown QoS kind {kind!r}")


@dataclass(frozen=True)
class Epoch:
    tau: float
    rate: float
    length: float
    overflow_at_end: float = 0.0

    @property
    def end(self) -> float:
        return self.tau + self.length


@dataclass(frozen=True)
class Finished:
    rate: float
    length: float


@dataclass(frozen=True)
class Schedule:
    epochs: tuple[Epoch, ...]
    T: float
    overflows: tuple[tuple[float, float], ...]
    energy_spent: float

    def departure(self, t: float) -> float:
        """Bits sent by absolute time ``t``."""
        out = 0.0
        for ep in self.epochs:
            if t <= ep.tau:
                break
            out += ep.rate * (min(t, ep.end) - ep.tau)
        return out

    def rates(self) -> list[float]:
        return [ep.rate for ep in self.epochs]


@dataclass(frozen=True)
class Infeasible:
    """No schedule exists. ``q`` is the absolute time of the violated requirement.

    ``required`` bits are due at ``q`` (counted from ``tau``) but at most
    ``achievable`` can be sent by then. ``epochs`` is the schedule prefix up
    to ``tau``; an infinite ``q`` means the energy can never carry the data.
    """

    q: float
    required: float
    achievable: float
    tau: float = 0.0
    cause: str = "energy"
    epochs: tuple[Epoch, ...] = ()


@dataclass(frozen=True)
class IterationState:
    scenario: Scenario
    tau: float
    battery: float
    sent: float
    spent: float
    timeline: EnergyTimeline
    epochs: tuple[Epoch, ...] = ()

    @property
    def data(self) -> Staircase:
        """Accumulated data in the iteration frame."""
        return self.scenario.data_curve.shift_rescale(self.tau, self.sent, self.scenario.eps_t)

    @property
    def qos(self) -> Staircase:
        return self.scenario.qos.shift_rescale(self.tau, self.sent, self.scenario.eps_t)

    @property
    def remaining(self) -> float:
        return self.scenario.total_data - self.sent

    def future_energy(self) -> list[tuple[float, float]]:
        """Energy arrivals after the origin, in frame time."""
        eps = self.scenario.eps_t
        return [(e - self.tau, a) for e, a in self.scenario.energy if e > self.tau + eps]

    def accumulated(self, t: float) -> float:
        """Accumulated battery just before frame time ``t`` (no future overflow)."""
        return self.battery + math.fsum(a for e, a in self.future_energy() if e < t)


def initial_state(scenario: Scenario) -> IterationState:
    e0 = scenario.energy[0][1]
    timeline = scenario.timeline
    if e0 > scenario.c_max:
        timeline = timeline.with_overflow(0.0, e0 - scenario.c_max)
    return IterationState(scenario, 0.0, min(e0, scenario.c_max), 0.0, 0.0, timeline)


def _frame_events(state: IterationState):
    sc = state.scenario
    eps = sc.eps_t
    tags: dict[float, set] = {}
    for t in state.data.times:
        if t > eps:
            tags.setdefault(t, set()).add("data")
    for t in state.qos.times:
        if t > eps:
            tags.setdefault(t, set()).add("qos")
    for t, _ in state.future_energy():
        tags.setdefault(t, set()).add("energy")
    times = sorted(tags)
    return times, [frozenset(tags[t]) for t in times]


def build_bounds(state: IterationState) -> BoundPair:
    sc = state.scenario
    times, tags = _frame_events(state)
    future = state.future_energy()
    arriving = dict(future)
    d_ba = battery_mapping(state.accumulated, sc.model, times)
    energy_events = [t for t, _ in future]
    d_emin = emin_mapping(lambda t: state.accumulated(t) + arriving[t] - sc.c_max, sc.model, energy_events)
    return merge_bounds(state.data, d_ba, state.qos, d_emin, times, tags, sc.tol_data)


def check_solution(state: IterationState) -> Optional[Infeasible]:
    """Earliest QoS event whose requirement exceeds what can be sent by then."""
    sc = state.scenario
    tol = sc.tol_data
    qos = state.qos
    if qos.base > tol:
        return Infeasible(state.tau, qos.base, 0.0, state.tau, "qos", state.epochs)
    data = state.data
    for q in qos.times:
        required = qos.eval(q)
        achievable = max_bits(sc.model, state.accumulated(q), q)
        if required > achievable + tol:
            return Infeasible(q + state.tau, required, achievable, state.tau, "energy", state.epochs)
        if required > data.eval(q, "left") + tol:
            return Infeasible(q + state.tau, required, data.eval(q, "left"), state.tau, "data", state.epochs)
    slope = sc.model.slope_at_zero()
    if slope > 0:
        pool = state.battery + math.fsum(a for _, a in state.future_energy())
        if state.remaining * slope >= pool:
            return Infeasible(math.inf, state.remaining, pool / slope, state.tau, "energy", state.epochs)
    return None


def _rate_tol(r: float) -> float:
    return 1e-9 * max(1.0, r) if math.isfinite(r) else 0.0


def check_finish(state: IterationState, bounds: BoundPair, rb: RateBounds) -> Union[Finished, str]:
    """Finish in one even-power epoch if possible, else say which epoch mode to use."""
    sc = state.scenario
    total = bounds.total
    if data_in_crossing(rb.r_max, bounds) < total - bounds.tol:
        return MIN_ENERGY
    future = state.future_energy()
    arrivals = [0.0] + [t for t, _ in future]
    energies = [state.battery] + [a for _, a in future]
    pool = 0.0
    # set when the previous pool was only rejected because this packet
    # arrives before that pool would have finished
    short = False
    for i, e in enumerate(energies):
        pool += e
        try:
            length, r_hat = even_allocation(sc.model, total, pool)
        except NoSolutionError:
            short = False
            continue
        if arrivals[i] >= length - sc.eps_t:
            # the newest packet arrives only after this finish time, and
            # bigger pools finish sooner still. If the smaller pool was too
            # slow, the rate has to rise when this packet comes in.
            return MIN_T if short else MIN_ENERGY
        if r_hat > rb.r_max + _rate_tol(rb.r_max):
            return MIN_T
        short = False
        if r_hat < rb.r_min - _rate_tol(rb.r_min):
            continue
        if i + 1 < len(arrivals) and arrivals[i + 1] < length - sc.eps_t:
            short = True
            continue
        if line_feasible(r_hat, bounds, length):
            return Finished(r_hat, length)
    return MIN_ENERGY


def _touch_time(r: float, bounds: BoundPair, stop: int) -> Optional[float]:
    tol = bounds.tol
    for k in range(min(stop + 1, len(bounds.times))):
        t = bounds.times[k]
        d = r * t
        if abs(d - bounds.upper[k]) <= tol:
            return t
        if bounds.lower[k] > tol and abs(d - bounds.lower[k]) <= tol:
            return t
    return None


def get_epoch(state: IterationState, bounds: BoundPair, rb: RateBounds, mode: str) -> Epoch:
    """Rate and length of the next (non-final) epoch."""
    if mode == MIN_T:
        return Epoch(state.tau, rb.r_max, rb.z_max)
    if mode != MIN_ENERGY:
        raise ValueError(f"unknown mode {mode!r}")
    if not bounds.times:
        raise SolverError("no events left but transmission cannot finish")
    if rb.collapse_side == "lower":
        r, z = rb.r_max, rb.z_max
    else:
        r, z = rb.r_min, rb.z_min
    tol = bounds.tol
    if r * bounds.times[-1] <= tol:
        # nothing to send yet: stay idle until data becomes available
        idle = [t for t, u in zip(bounds.times, bounds.upper) if u <= tol]
        if not idle:
            raise SolverError("zero rate chosen while data is available")
        return Epoch(state.tau, 0.0, idle[-1])
    stop = rb.collapse_index if rb.collapse_index is not None else len(bounds.times) - 1
    t = _touch_time(r, bounds, stop)
    if t is None:
        t = z
    if not math.isfinite(t):
        raise SolverError("minEnergy epoch has no end point")
    return Epoch(state.tau, r, t)


def advance(state: IterationState, epoch: Epoch) -> IterationState:
    """Move the origin to the end of ``epoch``; record any battery overflow."""
    sc = state.scenario
    eps = sc.eps_t
    end = state.tau + epoch.length
    for t in sc.event_times():
        if abs(t - end) <= eps:
            end = t
            break
    p = sc.model.power(epoch.rate)
    b, t_prev = state.battery, state.tau
    timeline = state.timeline
    overflow_end = 0.0
    for e, a in sc.energy:
        if e <= state.tau + eps or e > end + eps:
            continue
        b -= p * (e - t_prev)
        t_prev = e
        if b < -sc.tol_energy:
            raise SolverError(f"battery negative ({b!r}) before arrival at t={e!r}")
        b = max(b, 0.0) + a
        if b > sc.c_max + sc.tol_energy:
            over = b - sc.c_max
            timeline = timeline.with_overflow(e, over)
            if abs(e - end) <= eps:
                overflow_end = over
        b = min(b, sc.c_max)
    b -= p * (end - t_prev)
    if b < -sc.tol_energy:
        raise SolverError(f"battery negative ({b!r}) at end of epoch t={end!r}")
    b = min(max(b, 0.0), sc.c_max)
    done = Epoch(state.tau, epoch.rate, end - state.tau, overflow_end)
    return IterationState(
        sc,
        end,
        b,
        state.sent + epoch.rate * done.length,
        state.spent + p * done.length,
        timeline,
        state.epochs + (done,),
    )


def _schedule(state: IterationState) -> Schedule:
    return Schedule(state.epochs, state.tau, state.timeline.overflows, state.spent)


def iterate(scenario: Scenario) -> Union[Schedule, Infeasible]:
    """Run the three-step iteration until the data is out or a requirement fails."""
    state = initial_state(scenario)
    limit = 4 * (len(scenario.event_times()) + 1) + 8
    for _ in range(limit):
        if state.remaining <= scenario.tol_data:
            return _schedule(state)
        bad = check_solution(state)
        if bad is not None:
            return bad
        bounds = build_bounds(state)
        rb = rate_bounds(bounds)
        outcome = check_finish(state, bounds, rb)
        if isinstance(outcome, Finished):
            state = advance(state, Epoch(state.tau, outcome.rate, outcome.length))
            return _schedule(state)
        state = advance(state, get_epoch(state, bounds, rb, outcome))
    raise SolverError(f"no termination after {limit} iterations")


def _forced_overflow(state: IterationState, bounds: BoundPair) -> Optional[int]:
    """First energy arrival where even the fastest line cannot avoid overflow."""
    sc = state.scenario
    arriving = dict(state.future_energy())
    for k, t in enumerate(bounds.times):
        if t in arriving:
            need = max_bits(sc.model, max(0.0, state.accumulated(t) + arriving[t] - sc.c_max), t)
            if need > bounds.upper[k] + bounds.tol:
                return k
    return None


def deadline_bounds(state: IterationState, deadline: float) -> tuple[BoundPair, float]:
    """Corridor closed at ``deadline`` (absolute), where everything left must be out.

    Returns the bounds and the most that can be sent by the deadline. When an
    overflow is forced before the deadline the corridor is cut there instead
    (its end is pinned to the upper bound) and the cap is infinite: past the
    overflow the mapped bounds no longer describe the battery.
    """
    sc = state.scenario
    h = deadline - state.tau
    full = build_bounds(state)
    keep = [k for k, t in enumerate(full.times) if t < h - sc.eps_t]
    cut = _forced_overflow(state, full)
    if cut is not None and cut in keep:
        n = cut + 1
        pinned = BoundPair(full.times[:n], full.upper[:n], full.lower[:n], full.total, full.tags[:n], full.tol)
        return pinned, math.inf
    arrived = state.data.eval(h, "left")
    if arrived >= state.remaining - sc.tol_data:
        arrived = state.remaining
    cap = min(arrived, max_bits(sc.model, state.accumulated(h), h))
    bounds = BoundPair(
        tuple(full.times[k] for k in keep) + (h,),
        tuple(full.upper[k] for k in keep) + (min(cap, state.remaining),),
        tuple(full.lower[k] for k in keep) + (state.remaining,),
        state.remaining,
        tuple(full.tags[k] for k in keep) + (frozenset({"deadline"}),),
        full.tol,
    )
    return bounds, cap


def run_to_deadline(scenario: Scenario, deadline: float) -> Union[Schedule, Infeasible]:
    """Least-energy schedule that has sent everything by ``deadline``.

    Each epoch is the corridor-splitting line of the corridor closed at the
    deadline, so the schedule is the taut string through it. An ``Infeasible``
    result only says that this deadline cannot be met.
    """
    sc = scenario
    state = initial_state(sc)
    limit = 4 * (len(sc.event_times()) + 1) + 8
    for _ in range(limit):
        if state.remaining <= sc.tol_data:
            return _schedule(state)
        bad = check_solution(state)
        if bad is not None:
            return bad
        if state.tau >= deadline - sc.eps_t:
            return Infeasible(deadline, state.remaining, 0.0, state.tau, "energy", state.epochs)
        bounds, cap = deadline_bounds(state, deadline)
        if cap < state.remaining:
            cause = "data" if state.data.eval(deadline - state.tau, "left") <= cap else "energy"
            return Infeasible(deadline, state.remaining, cap, state.tau, cause, state.epochs)
        rb = rate_bounds(bounds, stop_at_total=False)
        if rb.collapse_index is None and math.isfinite(cap):
            state = advance(state, Epoch(state.tau, rb.r_min, state.remaining / rb.r_min))
            return _schedule(state)
        state = advance(state, get_epoch(state, bounds, rb, MIN_ENERGY))
    raise SolverError(f"no termination after {limit} iterations")


def _attempt(scenario: Scenario, deadline: float) -> Union[Schedule, Infeasible, None]:
    try:
        return run_to_deadline(scenario, deadline)
    except SolverError:
        # only seen within rounding of the optimum
        return None


def _earliest_finish(scenario: Scenario, hi: float, best: Schedule) -> Schedule:
    """Bisect on the deadline between the last data arrival and ``hi``."""
    lo = max(t for t, _ in scenario.data)
    while hi - lo > 1e-13 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        out = _attempt(scenario, mid)
        if isinstance(out, Schedule):
            hi, best = mid, out
        else:
            lo = mid
    return best


def solve(scenario: Scenario) -> Union[Schedule, Infeasible]:
    """Optimal schedule, or the requirement that makes the problem infeasible.

    The iteration's schedule is returned when it passes every optimality
    check. Otherwise its finish time (or a growing guess) seeds a bisection
    on deadline-closed corridors.
    """
    from .validation import validate

    try:
        first = iterate(scenario)
    except SolverError:
        first = None
    if isinstance(first, Schedule):
        if validate(scenario, first).ok:
            return first
        hi = first.T
    else:
        hi = 2.0 * max(1.0, max(scenario.event_times()))
    out = None
    for _ in range(64):
        out = _attempt(scenario, hi)
        if isinstance(out, Schedule):
            return _earliest_finish(scenario, hi, out)
        if out is not None and out.q != hi:
            # a QoS requirement or the total energy fails whatever the deadline
            return out
        hi *= 2.0
    if out is None:
        raise SolverError("no deadline could be met or refuted")
    return out
