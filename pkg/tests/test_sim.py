import csv
import math

import pytest

from ehsched import Schedule, solve
from ehsched.sim import (
    CSV_HEADER,
    ExperimentConfig,
    ResultRow,
    TrialResult,
    aggregate,
    generate_scenario,
    random_grid_scenario,
    run_experiment,
    run_trials,
    trial_rng,
    write_results,
)


def test_same_stream_same_scenario():
    cfg = ExperimentConfig()
    a = generate_scenario(trial_rng(7, 3), cfg, 2.0)
    b = generate_scenario(trial_rng(7, 3), cfg, 2.0)
    assert a == b
    assert a != generate_scenario(trial_rng(7, 4), cfg, 2.0)


def test_energy_is_normalized():
    cfg = ExperimentConfig()
    for i in range(20):
        sc = generate_scenario(trial_rng(1, i), cfg, 3.0)
        assert sc.total_energy == pytest.approx(3.0, abs=1e-12)
        assert sc.total_data == pytest.approx(cfg.data_total, abs=1e-12)
        assert all(0 <= t <= cfg.horizon for t, _ in sc.energy + sc.data)


def test_single_energy_packet_sits_at_zero():
    sc = generate_scenario(trial_rng(1, 0), ExperimentConfig(n_energy=1), 2.5)
    assert sc.energy == ((0.0, 2.5),)


def test_grid_scenarios_stay_on_the_grid():
    for i in range(30):
        sc = random_grid_scenario(trial_rng(5, i))
        for t, a in sc.energy + sc.data:
            assert abs(t * 10 - round(t * 10)) < 1e-9
            assert abs(a * 100 - round(a * 100)) < 1e-9
        for q in sc.qos.times:
            assert sc.qos.eval(q) <= sc.data_curve.eval(q, "left") + 1e-12


def test_trivial_config_echoes_the_known_answer():
    cfg = ExperimentConfig(trials=1, energy_levels=(5.0,), n_data=1, n_energy=1, qos_kind="none")
    sc = generate_scenario(trial_rng(cfg.seed, 0), cfg, 5.0)
    (row,) = run_experiment(cfg)
    assert row.opt_feasible_pct == 100
    out = solve(sc)
    assert isinstance(out, Schedule)
    assert row.opt_mean_T == pytest.approx(out.T / cfg.horizon)


def test_rows_follow_the_sweep_and_dominate():
    cfg = ExperimentConfig(trials=60, energy_levels=(4.0, 1.0, 2.0))
    results = run_trials(cfg)
    assert all(r.error is None for r in results)
    rows = aggregate(results, cfg)
    assert [r.energy_level for r in rows] == [1.0, 2.0, 4.0]
    for r in rows:
        assert 0 <= r.ebs_feasible_pct <= r.opt_feasible_pct <= 100
    for r in results:
        if r.ebs_feasible:
            assert r.opt_T <= r.ebs_T + 1e-9


def test_failed_trials_are_counted():
    cfg = ExperimentConfig(trials=2, energy_levels=(1.0,))
    results = [TrialResult(0, 1.0, 0.5, 0.7), TrialResult(1, 1.0, math.nan, math.nan, "boom")]
    (row,) = aggregate(results, cfg)
    assert row.failures == 1
    assert row.opt_feasible_pct == 50
    assert row.opt_mean_T == pytest.approx(0.5)


def test_csv_round_trip(tmp_path):
    rows = [ResultRow(1.0, 0.123456789012345, 90.0, 0.2, 80.0)]
    path = tmp_path / "out.csv"
    write_results(rows, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    with path.open() as fh:
        (rec,) = list(csv.DictReader(fh))
    assert list(rec) == CSV_HEADER
    assert float(rec["opt_mean_T"]) == pytest.approx(0.123456789012, rel=1e-12)
    assert float(rec["ebs_feasible_pct"]) == 80.0


def test_empty_rows_are_refused(tmp_path):
    with pytest.raises(ValueError):
        write_results([], tmp_path / "x.csv")


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError, match="cannot write"):
        write_results([ResultRow(1.0, 0.1, 1, 0.1, 1)], tmp_path / "missing" / "x.csv")


@pytest.mark.parametrize(
    "kwargs",
    [{"trials": 0}, {"energy_levels": ()}, {"energy_levels": (-1.0,)}, {"qos_kind": "soft"}, {"c_max": 0}],
)
def test_bad_configs(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_config_dict_round_trip():
    cfg = ExperimentConfig(trials=5, energy_levels=(1.0, 2.0))
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
