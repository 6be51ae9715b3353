"""Energy constraints mapped into the data domain for one solver iteration.

Everything here lives in the iteration frame: the origin is the point where
the current epoch starts, so a candidate epoch is the straight line r*t.
Bounds are only ever evaluated at event times; the upper bound between two
events holds the value of the next event and the lower bound holds the value
of the previous one, so checking a line at the events is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

from .curves import Staircase
from .power_rate import max_bits

__all__ = [
    "BoundPair",
    "RateBounds",
    "Crossing",
    "battery_mapping",
    "emin_mapping",
    "merge_bounds",
    "rate_bounds",
    "line_feasible",
    "first_crossing",
    "data_in_crossing",
]


@dataclass(frozen=True)
class BoundPair:
    """Merged corridor D_min <= D <= D_max sampled at the iteration's events.

    ``upper[k]`` is D_max just before ``times[k]`` and ``lower[k]`` is D_min
    at (just after) ``times[k]``. ``total`` is the data still to be sent,
    which is what D_max tends to after the last event.
    """

    times: tuple[float, ...]
    upper: tuple[float, ...]
    lower: tuple[float, ...]
    total: float
    tags: tuple[frozenset, ...] = ()
    tol: float = 1e-9

    def __post_init__(self):
        n = len(self.times)
        if len(self.upper) != n or len(self.lower) != n:
            raise ValueError("bound arrays must match the event list")
        if not self.tags:
            object.__setattr__(self, "tags", tuple(frozenset() for _ in range(n)))

    def __len__(self) -> int:
        return len(self.times)

    def upper_after(self, k: int) -> float:
        return self.upper[k + 1] if k + 1 < len(self.times) else self.total

    def is_upper_corner(self, k: int) -> bool:
        return self.upper_after(k) > self.upper[k] + self.tol

    def is_lower_corner(self, k: int) -> bool:
        prev = self.lower[k - 1] if k else 0.0
        return self.lower[k] > prev + self.tol

    @property
    def z_max(self) -> tuple[float, ...]:
        """Discontinuities of the upper bound."""
        return tuple(t for k, t in enumerate(self.times) if self.is_upper_corner(k))

    @property
    def z_min(self) -> tuple[float, ...]:
        return tuple(t for k, t in enumerate(self.times) if self.is_lower_corner(k))

    def upper_curve(self) -> Staircase:
        if not self.times:
            return Staircase(base=self.total)
        vals = list(self.upper[1:]) + [self.total]
        return Staircase.from_values(self.times, vals, self.upper[0])

    def lower_curve(self) -> Staircase:
        return Staircase.from_values(self.times, self.lower, 0.0)


class RateBounds(NamedTuple):
    r_max: float
    z_max: float
    r_min: float
    z_min: float
    # first event at which no single line from the origin stays in the corridor
    collapse_index: Optional[int] = None
    collapse_side: Optional[str] = None


class Crossing(NamedTuple):
    t: float
    which: str
    amount: float


def battery_mapping(
    ba_left: Callable[[float], float],
    model,
    events: Sequence[float],
    horizon: Optional[float] = None,
) -> Staircase:
    """Effective mapping of the accumulated battery into bits.

    ``ba_left(t)`` must return the accumulated battery just before ``t``. The
    returned curve's left limit at every event equals the actual mapping
    there and it is constant between events.
    """
    if not events:
        if horizon is None:
            return Staircase(base=math.inf)
        return Staircase(base=max_bits(model, ba_left(horizon), horizon))
    vals = [max_bits(model, max(0.0, ba_left(t)), t) for t in events]
    return Staircase.from_values(events[:-1], vals[1:], vals[0])


def emin_mapping(emin_right: Callable[[float], float], model, energy_events: Sequence[float]) -> Staircase:
    """Bits that a line from the origin must have sent at each energy arrival to avoid overflow."""
    vals = [max_bits(model, max(0.0, emin_right(t)), t) for t in energy_events]
    return Staircase.from_values(energy_events, vals, 0.0)


def merge_bounds(
    d_a: Staircase,
    d_ba: Staircase,
    d_qos: Staircase,
    d_emin: Staircase,
    events: Optional[Sequence[float]] = None,
    tags: Sequence[frozenset] = (),
    tol: float = 1e-9,
) -> BoundPair:
    """Pointwise min of the upper curves and max of the lower curves at the events.

    The overflow requirement is clamped to the upper bound where it cannot be
    met: the overflow is then unavoidable and the best the line can do is
    empty the data buffer.
    """
    if events is None:
        events = sorted(set(d_a.times) | set(d_ba.times) | set(d_qos.times) | set(d_emin.times))
        events = [t for t in events if t > 0]
    emin_points = set(d_emin.times)
    upper, lower = [], []
    running = 0.0
    for t in events:
        u = min(d_a.eval(t, "left"), d_ba.eval(t, "left"))
        if t in emin_points:
            running = max(running, min(d_emin.eval(t), u))
        upper.append(u)
        lower.append(max(d_qos.eval(t), running))
    return BoundPair(tuple(events), tuple(upper), tuple(lower), d_a.total, tuple(tags), tol)


def rate_bounds(bounds: BoundPair, stop_at_total: bool = True) -> RateBounds:
    """Largest and smallest constant rates that stay inside the corridor.

    Walks the events keeping the interval of rates whose line is feasible so
    far; stops where that interval would become empty. By default a line
    stops once it has carried all the data, so an upper bound at the total
    caps nothing; with ``stop_at_total=False`` every upper bound caps.
    """
    lo, hi = 0.0, math.inf
    z_lo, z_hi = math.inf, math.inf
    tol = bounds.tol
    for k, t in enumerate(bounds.times):
        u, l = bounds.upper[k], bounds.lower[k]
        capped = u < bounds.total - tol or not stop_at_total
        if capped and u < lo * t - tol:
            return RateBounds(hi, z_hi, lo, z_lo, k, "upper")
        if l > hi * t + tol:
            return RateBounds(hi, z_hi, lo, z_lo, k, "lower")
        if capped and u / t < hi:
            hi, z_hi = u / t, t
        if l / t > lo:
            lo, z_lo = l / t, t
    return RateBounds(hi, z_hi, lo, z_lo)


def line_feasible(r: float, bounds: BoundPair, t_end: float = math.inf) -> bool:
    """Whether the line r*t stays in the corridor at every event in (0, t_end]."""
    if r < 0:
        raise ValueError("rate must be non-negative")
    tol = bounds.tol
    for t, u, l in zip(bounds.times, bounds.upper, bounds.lower):
        if t > t_end + tol:
            break
        d = min(r * t, bounds.total)
        if d > u + tol or d < l - tol:
            return False
    return True


def first_crossing(r: float, bounds: BoundPair) -> Optional[Crossing]:
    """Earliest event where r*t meets or leaves the corridor; touching counts."""
    tol = bounds.tol
    for t, u, l in zip(bounds.times, bounds.upper, bounds.lower):
        d = min(r * t, bounds.total)
        if d >= u - tol:
            return Crossing(t, "upper", min(d, u))
        if l > tol and d <= l + tol:
            return Crossing(t, "lower", d)
    return None


def data_in_crossing(r: float, bounds: BoundPair) -> float:
    """Data the line r*t carries before it first exceeds the upper bound."""
    if r <= 0:
        return 0.0
    tol = bounds.tol
    for t, u in zip(bounds.times, bounds.upper):
        if u >= bounds.total - tol:
            return bounds.total
        if r * t > u + tol:
            return u
    return bounds.total
