"""Brute-force minimum completion time by dynamic programming on a time grid.

Time is cut into slots of width ``dt`` and data into quanta of ``dq`` bits.
In every slot the transmitter sends a whole number of quanta at constant
rate. For each (slot boundary, quanta sent) only the largest reachable
battery level is kept, which loses nothing because more stored energy never
hurts. Once every data packet has arrived the rest can also be sent in one
constant-power stretch that ends off the grid.

Every policy the DP explores is feasible, so its answer is an upper bound on
the true optimum; halving ``dt`` or ``dq`` only adds policies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .power_rate import Monomial, Shannon
from .scheduler import Scenario

__all__ = ["OracleConfig", "OracleResult", "OracleCapacityError", "GridAlignmentError", "dp_min_time"]


class OracleCapacityError(RuntimeError):
    """The requested grid is too large to search."""


class GridAlignmentError(ValueError):
    """Scenario times or data amounts are not multiples of the grid."""


@dataclass(frozen=True)
class OracleConfig:
    dt: float = 0.01
    dq: float = 0.0001
    # optional battery quantum; levels are floored to it (0 keeps them exact)
    equant: float = 0.0
    max_states: int = 50_000_000

    def __post_init__(self):
        if not (self.dt > 0 and self.dq > 0 and self.equant >= 0):
            raise ValueError("dt and dq must be positive, equant non-negative")

    def refined(self) -> "OracleConfig":
        return OracleConfig(self.dt / 2, self.dq / 2, self.equant / 2, self.max_states)


@dataclass(frozen=True)
class OracleResult:
    T: float
    states: int

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.T)


def _power(model, r: np.ndarray) -> np.ndarray:
    if isinstance(model, Shannon):
        return model.noise_power * np.expm1(r / model.bandwidth * math.log(2.0))
    if isinstance(model, Monomial):
        return model.scale * np.power(r, model.exponent)
    return np.vectorize(model.power, otypes=[float])(r)


def _aligned(x: float, q: float) -> Optional[int]:
    n = round(x / q)
    return n if abs(n * q - x) <= 1e-9 * max(1.0, abs(x)) else None


def _tail_times(model, rem: np.ndarray, battery: np.ndarray) -> np.ndarray:
    """Time to send ``rem`` bits at constant power spending exactly ``battery``.

    Bisection on the duration: the energy g(rem/T)*T falls as T grows.
    """
    out = np.full(rem.shape, np.inf)
    slope = model.slope_at_zero()
    ok = (battery > rem * slope) & (battery > 0)
    if not ok.any():
        return out
    d, b = rem[ok], battery[ok]
    lo = np.zeros_like(d)
    hi = np.maximum(d, 1e-12)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(200):
            need = _power(model, d / hi) * hi
            grow = need > b
            if not grow.any():
                break
            hi = np.where(grow, hi * 2.0, hi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            need = _power(model, d / mid) * mid
            fits = need <= b
            hi = np.where(fits, mid, hi)
            lo = np.where(fits, lo, mid)
    out[ok] = hi
    return out


def _convolve(lo: int, vals: np.ndarray, cost: np.ndarray, dense: bool):
    """Largest battery after one slot for every reachable amount of data sent.

    ``vals[i]`` is the battery with ``lo + i`` quanta sent. When ``vals`` is
    concave (always, unless battery levels are quantised) the max-plus
    convolution with the convex slot cost is a merge of the two slope
    sequences; otherwise it is done by brute force.
    """
    if dense:
        out = np.full(vals.size + cost.size - 1, -np.inf)
        for m, c in enumerate(cost):
            np.maximum(out[m : m + vals.size], vals - c, out=out[m : m + vals.size])
        return out
    slopes = np.concatenate([np.diff(vals), -np.diff(cost)])
    slopes = -np.sort(-slopes, kind="stable")
    return vals[0] - cost[0] + np.concatenate([[0.0], np.cumsum(slopes)])


def dp_min_time(scenario: Scenario, config: OracleConfig = OracleConfig()) -> OracleResult:
    sc = scenario
    dt, dq = config.dt, config.dq
    events = sc.event_times()
    slots = {}
    for t in events:
        n = _aligned(t, dt)
        if n is None:
            raise GridAlignmentError(f"event at t={t!r} is not a multiple of dt={dt!r}")
        slots[t] = n
    data_q: dict[int, int] = {}
    for t, a in sc.data:
        k = _aligned(a, dq)
        if k is None:
            raise GridAlignmentError(f"data packet of {a!r} bits is not a multiple of dq={dq!r}")
        data_q[slots[t]] = data_q.get(slots[t], 0) + k
    energy_at: dict[int, float] = {}
    for t, a in sc.energy:
        energy_at[slots[t]] = energy_at.get(slots[t], 0.0) + a
    event_slots = set(slots.values())

    total = sum(data_q.values())
    n_last = max(slots.values())
    states = (n_last + 1) * (total + 1)
    if states > config.max_states:
        raise OracleCapacityError(f"{states} states exceed the cap of {config.max_states}; use a coarser dt or dq")

    # largest per-slot send the battery could ever pay for
    m_max = 0
    while m_max < total and float(_power(sc.model, np.array([(m_max + 1) * dq / dt]))[0]) * dt <= sc.c_max:
        m_max += 1
    cost = _power(sc.model, np.arange(m_max + 1) * dq / dt) * dt

    def qos_quanta(t: float) -> int:
        need = sc.qos.eval(t, eps=1e-6 * dt)
        return max(0, math.ceil(need / dq - 1e-9))

    qos_jumps = [(t, sc.qos.eval(t)) for t in sc.qos.times]
    if qos_quanta(0.0) > 0 or sc.qos.total > sc.total_data + 1e-9 * max(1.0, sc.total_data):
        return OracleResult(math.inf, 0)

    dense = config.equant > 0
    tol_e = 1e-12 * max(1.0, sc.c_max)
    # reachable states: quanta sent in [lo, lo + len(vals)), best battery for each
    lo = 0
    vals = np.array([min(energy_at.get(0, 0.0), sc.c_max)])
    arrived = data_q.get(0, 0)
    t_best = math.inf

    for n in range(n_last + 1):
        t_now = n * dt
        if t_now >= t_best or vals.size == 0:
            break
        if lo + vals.size - 1 == total:
            t_best = t_now
            break
        if arrived == total and n in event_slots:
            keep = vals > -np.inf
            k = lo + np.nonzero(keep)[0]
            rem = (total - k) * dq
            tails = _tail_times(sc.model, rem, vals[keep])
            sent0 = k * dq
            for q, need in qos_jumps:
                if q > t_now:
                    with np.errstate(invalid="ignore"):
                        late = sent0 + rem / tails * (q - t_now) < need - 1e-9 * max(1.0, need)
                    tails = np.where(late & (t_now + tails > q), np.inf, tails)
            if tails.size:
                t_best = min(t_best, t_now + float(tails.min()))
        if n == n_last:
            break
        vals = _convolve(lo, vals, cost, dense)
        # data causality, then the empty battery, then arrivals and QoS
        vals = vals[: max(0, arrived - lo + 1)]
        ok = np.nonzero(vals >= -tol_e)[0]
        if ok.size == 0:
            vals = vals[:0]
            break
        lo, vals = lo + int(ok[0]), np.maximum(vals[ok[0] : ok[-1] + 1], 0.0)
        if dense:
            vals = np.where(vals >= 0, vals, -np.inf)
        e = energy_at.get(n + 1, 0.0)
        if e:
            vals = np.minimum(vals + e, sc.c_max)
        if config.equant:
            vals = np.floor(vals / config.equant + 1e-9) * config.equant
        req = qos_quanta((n + 1) * dt)
        if req > lo:
            vals = vals[req - lo :]
            lo = req
        arrived += data_q.get(n + 1, 0)

    return OracleResult(t_best, states)
