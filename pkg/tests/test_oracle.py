import math

import pytest

from ehsched import OracleConfig, Scenario, dp_min_time, solve
from ehsched.oracle import GridAlignmentError, OracleCapacityError


def test_unit_case_brackets_the_analytic_optimum(unit):
    res = dp_min_time(unit, OracleConfig(dt=0.01))
    assert 1.0 - 1e-9 <= res.T <= 1.05


def test_two_packets_reach_two_seconds(two_packets):
    assert dp_min_time(two_packets).T == pytest.approx(2.0, abs=1e-6)


def test_forced_overflow_case(forced_overflow):
    res = dp_min_time(forced_overflow)
    assert 1.75 - 1e-9 <= res.T <= 1.85
    assert res.T == pytest.approx(1.75, abs=1e-6)


def test_hopeless_qos_is_infeasible(hopeless):
    res = dp_min_time(hopeless)
    assert not res.feasible
    assert math.isinf(res.T)


def test_qos_above_the_data_is_infeasible():
    sc = Scenario.build([(0, 5)], [(0, 1)], 10, qos={"kind": "explicit", "params": {"jumps": [[0.5, 2]]}})
    assert not dp_min_time(sc).feasible


def test_starved_energy_is_infeasible():
    # 1 bit needs more than ln 2 J whatever the rate
    sc = Scenario.build([(0, 0.6)], [(0, 1)], 10)
    assert not dp_min_time(sc).feasible


def test_never_below_the_solver(forced_overflow, two_packets, unit):
    for sc in (forced_overflow, two_packets, unit):
        assert dp_min_time(sc).T >= solve(sc).T - 1e-9


def test_refinement_never_increases_T():
    sc = Scenario.build([(0, 0.8), (0.7, 1.3)], [(0, 0.6), (0.4, 0.7)], 1.5)
    coarse = OracleConfig(dt=0.02, dq=0.0004)
    t1 = dp_min_time(sc, coarse).T
    t2 = dp_min_time(sc, coarse.refined()).T
    t_opt = solve(sc).T
    assert t_opt - 1e-9 <= t2 <= t1 * (1 + 1e-9)


def test_misaligned_event_time_is_refused():
    sc = Scenario.build([(0, 1)], [(0.005, 1)], 10)
    with pytest.raises(GridAlignmentError):
        dp_min_time(sc, OracleConfig(dt=0.01))


def test_misaligned_data_amount_is_refused():
    sc = Scenario.build([(0, 1)], [(0, 0.00015)], 10)
    with pytest.raises(GridAlignmentError):
        dp_min_time(sc, OracleConfig(dq=0.0001))


def test_state_cap_refuses_large_grids(unit):
    with pytest.raises(OracleCapacityError):
        dp_min_time(unit, OracleConfig(dt=0.01, dq=1e-4, max_states=100))


def test_battery_quantum_is_pessimistic():
    sc = Scenario.build([(0, 0.8), (0.5, 0.9)], [(0, 1.0)], 2)
    exact = dp_min_time(sc, OracleConfig(dq=0.001)).T
    coarse = dp_min_time(sc, OracleConfig(dq=0.001, equant=0.01)).T
    assert coarse >= exact - 1e-12


@pytest.mark.parametrize("kwargs", [{"dt": 0}, {"dq": -1}, {"equant": -0.1}])
def test_config_rejects_bad_quanta(kwargs):
    with pytest.raises(ValueError):
        OracleConfig(**kwargs)
