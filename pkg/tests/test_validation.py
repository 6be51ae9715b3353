import pytest

from ehsched import Epoch, Scenario, Schedule, solve, validate
from ehsched.validation import CONSTRAINT, OPTIMALITY


def schedule(*epochs, overflows=()):
    eps = [Epoch(*e) for e in epochs]
    T = eps[-1].tau + eps[-1].length
    return Schedule(tuple(eps), T, tuple(overflows), 0.0)


def failed(report):
    return {c.name for c in report.failures}


@pytest.mark.parametrize("name", ["unit", "two_packets", "forced_overflow"])
def test_solver_output_passes(name, request):
    sc = request.getfixturevalue(name)
    report = validate(sc, solve(sc))
    assert report.ok, report.summary()
    assert {"ecc", "dcc", "completion", "battery-empty-at-T"} <= report.names()


def test_overspending_before_the_first_arrival(unit):
    r = 1.2
    report = validate(unit, schedule((0, r, 1 / r)))
    assert "ecc" in failed(report)
    assert not report.constraints_ok


def test_rate_change_between_events(unit):
    report = validate(unit, schedule((0, 0.9, 0.5), (0.5, 1.1, 0.05 / 1.1 + 0.5)))
    assert "rate-change-at-event" in failed(report)


def test_sending_before_arrival():
    sc = Scenario.build([(0, 5)], [(0, 1), (1, 1)], 10)
    report = validate(sc, schedule((0, 2, 1)))
    assert "dcc" in failed(report)


def test_missing_a_qos_deadline():
    sc = Scenario.build([(0, 5)], [(0, 1)], 10, qos={"kind": "explicit", "params": {"jumps": [[0.5, 1]]}})
    report = validate(sc, schedule((0, 1, 1)))
    assert "qos" in failed(report)


def test_shortened_schedule_is_incomplete(unit):
    good = solve(unit)
    ep = good.epochs[0]
    short = Schedule((Epoch(ep.tau, ep.rate, ep.length * 0.99),), good.T * 0.99, (), 0.0)
    report = validate(unit, short)
    assert "completion" in failed(report)


def test_slow_schedule_is_valid_but_not_optimal(unit):
    report = validate(unit, schedule((0, 0.5, 2)))
    assert report.constraints_ok
    assert not report.ok
    assert {c.kind for c in report.failures} == {OPTIMALITY}
    assert "battery-empty-at-T" in failed(report)


def test_gap_in_the_epochs(unit):
    report = validate(unit, Schedule((Epoch(0, 1, 0.5), Epoch(0.6, 1, 0.5)), 1.1, (), 0.0))
    assert "structure" in failed(report)


def test_wrong_overflow_record(forced_overflow):
    good = solve(forced_overflow)
    bad = Schedule(good.epochs, good.T, (), good.energy_spent)
    report = validate(forced_overflow, bad)
    assert "overflow-record" in failed(report)
    assert all(c.kind == CONSTRAINT for c in report.failures)


def test_summary_names_the_failure(unit):
    text = validate(unit, schedule((0, 1.2, 1 / 1.2))).summary()
    assert "FAIL ecc" in text
