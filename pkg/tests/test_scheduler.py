import math

import pytest
from hypothesis import given, settings

from ehsched import Infeasible, Scenario, Schedule, Staircase, solve, validate
from ehsched.mapping import BoundPair, rate_bounds
from ehsched.scheduler import (
    MIN_ENERGY,
    MIN_T,
    Epoch,
    Finished,
    advance,
    build_bounds,
    check_finish,
    check_solution,
    get_epoch,
    initial_state,
    iterate,
    run_to_deadline,
)

from .strategies import scenarios, witness_holds


def explicit(jumps):
    return {"kind": "explicit", "params": {"jumps": jumps}}


def test_check_solution_flags_unreachable_qos(hopeless):
    bad = check_solution(initial_state(hopeless))
    assert bad.q == 1
    assert bad.required == pytest.approx(2)
    assert bad.achievable == pytest.approx(1)


def test_check_solution_accepts_the_boundary():
    sc = Scenario.build([(0, 1)], [(0, 1)], 10, qos=explicit([[1, 1]]))
    assert check_solution(initial_state(sc)) is None


def test_check_solution_without_qos(unit):
    assert check_solution(initial_state(unit)) is None


def test_check_finish_even_allocation(unit):
    state = initial_state(unit)
    bounds = build_bounds(state)
    out = check_finish(state, bounds, rate_bounds(bounds))
    assert isinstance(out, Finished)
    assert out.rate == pytest.approx(1)
    assert out.length == pytest.approx(1)


def test_check_finish_rate_above_r_max(unit):
    state = initial_state(unit)
    bounds = build_bounds(state)
    rb = rate_bounds(bounds)._replace(r_max=0.8, z_max=1.0)
    assert check_finish(state, bounds, rb) == MIN_T


def test_check_finish_when_the_fastest_line_stops_short():
    sc = Scenario.build([(0, 1)], [(0, 5)], 10)
    state = initial_state(sc)
    bounds = BoundPair((1.0,), (1.0,), (0.0,), 5.0)
    assert check_finish(state, bounds, rate_bounds(bounds)) == MIN_ENERGY


def test_get_epoch_min_t(unit):
    state = initial_state(unit)
    bounds = BoundPair((1.0, 2.0), (1.0, 3.0), (0.0, 0.0), 3.0)
    ep = get_epoch(state, bounds, rate_bounds(bounds), MIN_T)
    assert (ep.rate, ep.length) == (1, 1)


def test_get_epoch_splits_the_corridor(unit):
    state = initial_state(unit)
    bounds = BoundPair((1.0, 2.0), (1.0, 1.0), (0.5, 0.5), 2.0)
    ep = get_epoch(state, bounds, rate_bounds(bounds), MIN_ENERGY)
    assert ep.rate == pytest.approx(0.5)
    assert ep.length == pytest.approx(1)
    with pytest.raises(ValueError):
        get_epoch(state, bounds, rate_bounds(bounds), "fast")


def test_advance_shifts_the_data(unit):
    sc = Scenario.build([(0, 5)], [(0, 2)], 10)
    nxt = advance(initial_state(sc), Epoch(0.0, 0.5, 1.0))
    assert nxt.tau == 1
    assert nxt.data.base == pytest.approx(1.5)
    assert nxt.battery == pytest.approx(5 - sc.model.power(0.5))


def test_advance_zero_rate_moves_only_time():
    sc = Scenario.build([(0, 1)], [(0, 1), (1, 1)], 10)
    nxt = advance(initial_state(sc), Epoch(0.0, 0.0, 0.5))
    assert nxt.sent == 0 and nxt.battery == 1
    assert nxt.data.times == (0.5,)


def test_advance_records_overflow(forced_overflow):
    nxt = advance(initial_state(forced_overflow), Epoch(0.0, 1.0, 0.5))
    assert nxt.timeline.overflows == ((0.5, pytest.approx(0.5)),)
    assert nxt.epochs[-1].overflow_at_end == pytest.approx(0.5)
    assert nxt.battery == pytest.approx(1)


def test_unit_case(unit):
    out = solve(unit)
    assert out.T == pytest.approx(1, abs=1e-12)
    assert out.rates() == [pytest.approx(1)]


def test_two_packets(two_packets):
    out = solve(two_packets)
    assert out.T == pytest.approx(2, abs=1e-9)
    assert [ep.rate for ep in out.epochs] == [pytest.approx(1)] * len(out.epochs)
    assert out.overflows == ()


def test_forced_overflow_walkthrough(forced_overflow):
    out = solve(forced_overflow)
    got = [(ep.rate, ep.length, ep.overflow_at_end) for ep in out.epochs]
    want = [(1, 0.5, 0.5), (0, 0.25, 0), (1, 1, 0)]
    assert got == [tuple(pytest.approx(x, abs=1e-9) for x in w) for w in want]
    assert out.T == pytest.approx(1.75, abs=1e-9)


def test_hopeless_is_infeasible(hopeless):
    out = solve(hopeless)
    assert isinstance(out, Infeasible)
    assert out.q == 1
    assert witness_holds(hopeless, out)


def test_too_little_energy_in_total():
    sc = Scenario.build([(0, 0.5)], [(0, 1)], 10)
    out = solve(sc)
    assert isinstance(out, Infeasible)
    assert math.isinf(out.q)


def test_iteration_alone_can_stop_early():
    # no corridor collapse: the plain iteration overspends time here
    sc = Scenario.build([(0, 0.47), (1, 2.45), (1.8, 1.05)], [(0, 0.29), (0.8, 1.23)], 3.92)
    first = iterate(sc)
    best = solve(sc)
    assert isinstance(best, Schedule)
    assert best.T < first.T - 0.5
    assert validate(sc, best).ok


def test_run_to_deadline_meets_loose_deadlines(unit):
    out = run_to_deadline(unit, 3.0)
    assert isinstance(out, Schedule)
    assert out.T <= 3.0 + 1e-9
    assert isinstance(run_to_deadline(unit, 0.9), Infeasible)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario.build([(0.5, 1)], [(0, 1)], 1)
    with pytest.raises(ValueError):
        Scenario.build([(0, 1)], [], 1)
    with pytest.raises(ValueError):
        Scenario.build([(0, 1)], [(0, 1)], 0)
    with pytest.raises(ValueError):
        Scenario.build([(0, 1)], [(0, -1)], 1)
    with pytest.raises(ValueError):
        Scenario.build([(0, 1)], [(0, 1)], 1, qos={"kind": "psychic"})


def test_qos_kinds_build_curves():
    sc = Scenario.build([(0, 5)], [(0, 1), (1, 1)], 10, qos={"kind": "deadline", "params": {"theta": 0.5}})
    assert sc.qos.jumps == [(0.5, 1), (1.5, 1)]
    sc = Scenario.build([(0, 5)], [(0, 1)], 10, qos={"kind": "buffer", "params": {"beta": 0.5}})
    assert sc.qos.eval(0) == pytest.approx(0.5)
    assert Scenario.build([(0, 5)], [(0, 1)], 10, qos=Staircase()).qos == Staircase()


def test_solve_is_deterministic(forced_overflow):
    assert solve(forced_overflow) == solve(forced_overflow)


@settings(max_examples=40)
@given(scenarios())
def test_solver_output_always_validates(sc):
    out = solve(sc)
    if isinstance(out, Schedule):
        report = validate(sc, out)
        assert report.ok, report.summary()
    else:
        assert witness_holds(sc, out)


@settings(max_examples=30)
@given(scenarios(qos=False))
def test_later_deadlines_are_no_harder(sc):
    out = solve(sc)
    if not isinstance(out, Schedule):
        return
    for slack in (1.0, 1.5, 3.0):
        later = run_to_deadline(sc, out.T * slack + 1e-9)
        assert isinstance(later, Schedule)
        assert later.T <= out.T * slack + 1e-6
