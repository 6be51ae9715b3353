"""Empty-buffers heuristic used as the comparison baseline.

At every arrival it picks the constant rate that empties the data queue by
the next arrival. If the battery cannot pay for that rate it gives up. After
the last arrival the backlog is sent with the remaining battery at constant
power.
"""

from __future__ import annotations

import math
from typing import Union

from .power_rate import NoSolutionError, even_allocation, max_bits
from .scheduler import Epoch, Infeasible, Scenario, Schedule

__all__ = ["ebs_solve"]


def _qos_violation(sc: Scenario, t0: float, t1: float, sent: float, r: float):
    for q in sc.qos.times:
        if t0 < q <= t1 + sc.eps_t:
            need = sc.qos.eval(q)
            have = sent + r * (min(q, t1) - t0)
            if have < need - sc.tol_data:
                return q, need, have
    return None


def ebs_solve(scenario: Scenario) -> Union[Schedule, Infeasible]:
    sc = scenario
    eps = sc.eps_t
    energy = dict(sc.energy)
    data = dict(sc.data)
    arrivals = sorted(set(energy) | set(data))
    total = sc.total_data

    b = energy.get(0.0, 0.0)
    overflows = []
    if b > sc.c_max:
        overflows.append((0.0, b - sc.c_max))
        b = sc.c_max
    arrived = data.get(0.0, 0.0)
    sent, spent, t = 0.0, 0.0, 0.0
    epochs: list[Epoch] = []

    if sc.qos.base > sc.tol_data:
        return Infeasible(0.0, sc.qos.base, 0.0, 0.0, "qos", ())

    for t_next in arrivals:
        if t_next <= eps:
            continue
        if total - sent <= sc.tol_data:
            break
        length = t_next - t
        backlog = arrived - sent
        r = max(backlog, 0.0) / length
        need = sc.model.power(r) * length
        if need > b + sc.tol_energy:
            return Infeasible(t_next, backlog, max_bits(sc.model, b, length), t, "energy", tuple(epochs))
        bad = _qos_violation(sc, t, t_next, sent, r)
        if bad is not None:
            return Infeasible(bad[0], bad[1], bad[2], t, "qos", tuple(epochs))
        b = max(b - need, 0.0)
        sent += r * length
        spent += need
        over = 0.0
        if t_next in energy:
            b += energy[t_next]
            if b > sc.c_max:
                over = b - sc.c_max
                overflows.append((t_next, over))
                b = sc.c_max
        arrived += data.get(t_next, 0.0)
        epochs.append(Epoch(t, r, length, over))
        t = t_next

    backlog = total - sent
    if backlog > sc.tol_data:
        try:
            length, r = even_allocation(sc.model, backlog, b)
        except NoSolutionError:
            return Infeasible(math.inf, backlog, 0.0, t, "energy", tuple(epochs))
        bad = _qos_violation(sc, t, t + length, sent, r)
        if bad is not None:
            return Infeasible(bad[0], bad[1], bad[2], t, "qos", tuple(epochs))
        epochs.append(Epoch(t, r, length, 0.0))
        spent += sc.model.power(r) * length
        t += length
    return Schedule(tuple(epochs), t, tuple(overflows), spent)
