import json

import pytest

from ehsched import Monomial, Scenario, solve
from ehsched.io import (
    InputError,
    dumps,
    load_scenario,
    load_schedule,
    outcome_to_dict,
    scenario_from_dict,
    scenario_to_dict,
    schedule_from_dict,
)

DOC = {
    "model": {"kind": "shannon", "params": {"bandwidth": 1, "noise_power": 1}},
    "c_max": 1,
    "energy": [[0, 1], [0.5, 1]],
    "data": [[0, 0.5], [0.75, 1]],
}


def test_scenario_round_trip():
    sc = scenario_from_dict(DOC)
    assert scenario_from_dict(scenario_to_dict(sc)) == sc


def test_qos_spec_survives_the_round_trip():
    doc = dict(DOC, qos={"kind": "deadline", "params": {"theta": 0.5}})
    sc = scenario_from_dict(doc)
    assert scenario_to_dict(sc)["qos"] == doc["qos"]


def test_monomial_model():
    doc = dict(DOC, model={"kind": "monomial", "params": {"exponent": 3, "scale": 2}})
    assert scenario_from_dict(doc).model == Monomial(3.0, 2.0)


@pytest.mark.parametrize(
    "patch, where",
    [
        ({"c_max": -1}, "c_max"),
        ({"energy": [[0, -1]]}, "energy/0/1"),
        ({"data": "lots"}, "data"),
        ({"qos": {"kind": "magic"}}, "qos/kind"),
        ({"extra": 1}, "<root>"),
    ],
)
def test_schema_errors_name_the_field(patch, where):
    with pytest.raises(InputError, match=where):
        scenario_from_dict(dict(DOC, **patch))


def test_semantic_errors_are_input_errors():
    with pytest.raises(InputError, match="t=0"):
        scenario_from_dict(dict(DOC, energy=[[1, 1]]))


def test_bad_json_reports_the_line(tmp_path):
    p = tmp_path / "s.json"
    p.write_text('{\n "c_max": 1,\n oops}')
    with pytest.raises(InputError, match="line 3"):
        load_scenario(p)


def test_missing_file(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        load_scenario(tmp_path / "nope.json")


def test_schedule_round_trip(tmp_path, forced_overflow):
    out = solve(forced_overflow)
    p = tmp_path / "sched.json"
    p.write_text(dumps(outcome_to_dict(out)))
    assert load_schedule(p) == out


def test_witness_is_not_a_schedule(tmp_path, hopeless):
    p = tmp_path / "w.json"
    p.write_text(dumps(outcome_to_dict(solve(hopeless))))
    assert json.loads(p.read_text())["infeasible"] is True
    with pytest.raises(InputError, match="witness"):
        load_schedule(p)


def test_infinite_witness_time_is_null():
    doc = outcome_to_dict(solve(Scenario.build([(0, 0.5)], [(0, 1)], 1)))
    assert doc["q"] is None


def test_schedule_schema():
    with pytest.raises(InputError):
        schedule_from_dict({"T": 1, "epochs": [{"tau": 0, "rate": -1, "length": 1}]})
