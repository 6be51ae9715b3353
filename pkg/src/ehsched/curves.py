"""Cumulative staircase curves and the battery-derived quantities.

All curves are right-continuous, non-decreasing step functions stored as a
base value plus strictly increasing jump times. Lower-bound curves are
clamped at zero when they are built, never lazily.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "Staircase",
    "EnergyTimeline",
    "BatteryState",
    "time_tolerance",
    "coalesce",
    "eval_curve",
    "shift_rescale",
    "accumulated_battery",
    "min_energy_expenditure",
    "qos_deadline",
    "qos_buffer",
]


def time_tolerance(horizon: float) -> float:
    """Two instants closer than this are treated as the same event."""
    return 1e-9 * max(1.0, horizon)


def coalesce(points: Iterable[tuple[float, float]], eps: float = 0.0) -> list[tuple[float, float]]:
    """Sort (time, amount) pairs and sum amounts whose times lie within ``eps``.

    Zero amounts are dropped; the first time of each cluster is kept.
    """
    out: list[list[float]] = []
    for t, a in sorted((float(t), float(a)) for t, a in points):
        if t < 0:
            raise ValueError(f"negative event time {t!r}")
        if a < 0:
            raise ValueError(f"negative amount {a!r} at t={t!r}")
        if out and t - out[-1][0] <= eps:
            out[-1][1] += a
        else:
            out.append([t, a])
    return [(t, a) for t, a in out if a > 0]


@dataclass(frozen=True)
class Staircase:
    """base + sum of increments at jump times (right-continuous)."""

    times: tuple[float, ...] = ()
    increments: tuple[float, ...] = ()
    base: float = 0.0
    _cum: tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.times) != len(self.increments):
            raise ValueError("times and increments differ in length")
        if self.base < 0:
            raise ValueError("staircase base must be non-negative")
        for a, b in zip(self.times, self.times[1:]):
            if not b > a:
                raise ValueError("jump times must be strictly increasing")
        if any(not d > 0 for d in self.increments):
            raise ValueError("increments must be positive")
        if self.times and self.times[0] < 0:
            raise ValueError("jump times must be non-negative")
        cum, acc = [], self.base
        for d in self.increments:
            acc += d
            cum.append(acc)
        object.__setattr__(self, "_cum", tuple(cum))

    @classmethod
    def from_jumps(cls, jumps: Iterable[tuple[float, float]], base: float = 0.0, eps: float = 0.0) -> "Staircase":
        pts = coalesce(jumps, eps)
        return cls(tuple(t for t, _ in pts), tuple(a for _, a in pts), float(base))

    @classmethod
    def from_values(cls, times: Sequence[float], values: Sequence[float], base: float = 0.0) -> "Staircase":
        """Build from the curve's value at and after each time; non-increases are dropped."""
        ts, incs, prev = [], [], max(0.0, base)
        for t, v in zip(times, values):
            if v > prev:
                ts.append(float(t))
                incs.append(v - prev)
                prev = v
        return cls(tuple(ts), tuple(incs), max(0.0, base))

    @property
    def jumps(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.increments))

    @property
    def total(self) -> float:
        return self._cum[-1] if self._cum else self.base

    def eval(self, t: float, side: str = "right", eps: float = 0.0) -> float:
        if t < 0:
            raise ValueError(f"curve evaluated at negative time {t!r}")
        if side == "right":
            k = bisect.bisect_right(self.times, t + eps)
        elif side == "left":
            k = bisect.bisect_left(self.times, t - eps)
        else:
            raise ValueError(f"side must be 'left' or 'right', not {side!r}")
        return self._cum[k - 1] if k else self.base

    def __call__(self, t: float) -> float:
        return self.eval(t)

    def shift_rescale(self, tau: float, offset: float, eps: float = 0.0) -> "Staircase":
        """The curve t -> {self(t + tau) - offset}^+."""
        if tau < 0 or offset < 0:
            raise ValueError("tau and offset must be non-negative")
        k = bisect.bisect_right(self.times, tau + eps)
        base = (self._cum[k - 1] if k else self.base) - offset
        times = [t - tau for t in self.times[k:]]
        values = [c - offset for c in self._cum[k:]]
        return Staircase.from_values(times, values, base)

    def scaled(self, factor: float) -> "Staircase":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Staircase(self.times, tuple(d * factor for d in self.increments), self.base * factor)


def eval_curve(curve: Staircase, t: float, side: str = "right") -> float:
    return curve.eval(t, side)


def shift_rescale(curve: Staircase, tau: float, offset: float) -> Staircase:
    return curve.shift_rescale(tau, offset)


@dataclass(frozen=True)
class EnergyTimeline:
    """Energy arrivals (first one at t=0 holds the initial battery) and overflows seen so far."""

    arrivals: tuple[tuple[float, float], ...]
    overflows: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.arrivals or self.arrivals[0][0] != 0:
            raise ValueError("the first energy arrival must be at t=0")
        for (a, _), (b, _) in zip(self.arrivals, self.arrivals[1:]):
            if not b > a:
                raise ValueError("energy arrival times must be strictly increasing")

    @classmethod
    def from_packets(cls, packets: Iterable[tuple[float, float]], eps: float = 0.0) -> "EnergyTimeline":
        pts = coalesce(packets, eps)
        if not pts or pts[0][0] > eps:
            pts.insert(0, (0.0, 0.0))
        else:
            pts[0] = (0.0, pts[0][1])
        return cls(tuple(pts))

    def with_overflow(self, t: float, amount: float) -> "EnergyTimeline":
        return EnergyTimeline(self.arrivals, self.overflows + ((t, amount),))

    def overflow_total(self, until: float = math.inf) -> float:
        return math.fsum(o for t, o in self.overflows if t <= until)

    @property
    def total(self) -> float:
        return math.fsum(e for _, e in self.arrivals)


@dataclass(frozen=True)
class BatteryState:
    level: float
    capacity: float

    def __post_init__(self):
        if not self.capacity > 0:
            raise ValueError("battery capacity must be positive")
        if not 0 <= self.level <= self.capacity:
            raise ValueError(f"battery level {self.level!r} outside [0, {self.capacity!r}]")


def accumulated_battery(timeline: EnergyTimeline, t_x: float, t: float, side: str = "right") -> float:
    """Harvested energy up to ``t`` minus the overflows recorded at or before ``t_x``."""
    if side == "right":
        arrived = math.fsum(e for ej, e in timeline.arrivals if ej <= t)
        lost = math.fsum(o for ej, o in timeline.overflows if ej <= t_x and ej <= t)
    else:
        arrived = math.fsum(e for ej, e in timeline.arrivals if ej < t)
        lost = math.fsum(o for ej, o in timeline.overflows if ej <= t_x and ej < t)
    return arrived - lost


def min_energy_expenditure(timeline: EnergyTimeline, c_max: float, t_x: float, t: float) -> float:
    """Energy that must already be spent at ``t`` to avoid overflowing in (t_x, t]."""
    return max(0.0, accumulated_battery(timeline, t_x, t) - c_max)


def qos_deadline(data: Staircase, theta: Sequence[float], eps: float = 0.0) -> Staircase:
    """Minimum departure for per-packet deadlines: packet k is due at d_k + theta_k."""
    packets = list(data.jumps)
    if data.base > 0:
        packets.insert(0, (0.0, data.base))
    if len(packets) != len(theta):
        raise ValueError(f"{len(packets)} packets but {len(theta)} deadlines")
    if any(th < 0 for th in theta):
        raise ValueError("deadlines must be non-negative")
    return Staircase.from_jumps(((d + th, q) for (d, q), th in zip(packets, theta)), eps=eps)


def qos_buffer(data: Staircase, beta: float) -> Staircase:
    """Minimum departure for a finite data queue of ``beta`` bits: {D_A(t) - beta}^+."""
    if beta < 0:
        raise ValueError("buffer size must be non-negative")
    return Staircase.from_values(data.times, [v - beta for v in data._cum], data.base - beta)
