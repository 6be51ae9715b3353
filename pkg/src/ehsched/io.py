"""Scenario and schedule files (JSON).

Units are fixed: seconds, Joules, bits and bits/s.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

import jsonschema

from .power_rate import model_from_dict, model_to_dict
from .scheduler import Epoch, Infeasible, Scenario, Schedule

__all__ = [
    "SCENARIO_SCHEMA",
    "SCHEDULE_SCHEMA",
    "InputError",
    "scenario_from_dict",
    "scenario_to_dict",
    "load_scenario",
    "outcome_to_dict",
    "schedule_from_dict",
    "load_schedule",
    "dumps",
]

_pair = {
    "type": "array",
    "items": [{"type": "number", "minimum": 0}, {"type": "number", "exclusiveMinimum": 0}],
    "minItems": 2,
    "maxItems": 2,
}

SCENARIO_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["c_max", "energy", "data"],
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["shannon", "monomial"]},
                "params": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
            },
        },
        "c_max": {"type": "number", "exclusiveMinimum": 0},
        "energy": {"type": "array", "minItems": 1, "items": _pair},
        "data": {"type": "array", "minItems": 1, "items": _pair},
        "qos": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["none", "explicit", "deadline", "buffer"]},
                "params": {
                    "type": "object",
                    "properties": {
                        "jumps": {"type": "array", "items": _pair},
                        "theta": {
                            "oneOf": [
                                {"type": "number", "minimum": 0},
                                {"type": "array", "items": {"type": "number", "minimum": 0}},
                            ]
                        },
                        "beta": {"type": "number", "minimum": 0},
                    },
                },
            },
        },
    },
}

_num_or_null = {"type": ["number", "null"]}

SCHEDULE_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["T", "epochs"],
    "properties": {
        "T": {"type": "number", "minimum": 0},
        "epochs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["tau", "rate", "length"],
                "properties": {
                    "tau": {"type": "number", "minimum": 0},
                    "rate": {"type": "number", "minimum": 0},
                    "length": {"type": "number", "minimum": 0},
                    "overflow_at_end": {"type": "number", "minimum": 0},
                },
            },
        },
        "overflows": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}},
        "energy_spent": _num_or_null,
    },
}


class InputError(ValueError):
    """Malformed or unreadable input file."""


def _check(doc, schema, what: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"{what}: at {where}: {exc.message}") from None


def _read_json(path) -> object:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def scenario_from_dict(doc: dict) -> Scenario:
    _check(doc, SCENARIO_SCHEMA, "scenario")
    qos = doc.get("qos")
    try:
        model = model_from_dict(doc.get("model", {"kind": "shannon"}))
        return Scenario.build(
            [tuple(p) for p in doc["energy"]], [tuple(p) for p in doc["data"]], doc["c_max"], model, qos
        )
    except (ValueError, KeyError) as exc:
        raise InputError(f"scenario: {exc}") from None


def scenario_to_dict(sc: Scenario) -> dict:
    out = {
        "model": model_to_dict(sc.model),
        "c_max": sc.c_max,
        "energy": [list(p) for p in sc.energy],
        "data": [list(p) for p in sc.data],
    }
    if sc.qos_spec is not None:
        out["qos"] = sc.qos_spec
    elif sc.qos.times or sc.qos.base:
        out["qos"] = {"kind": "explicit", "params": {"jumps": [list(p) for p in sc.qos.jumps]}}
    return out


def load_scenario(path) -> Scenario:
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    try:
        return scenario_from_dict(doc)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def _finite(x: float):
    return x if math.isfinite(x) else None


def outcome_to_dict(outcome: Union[Schedule, Infeasible]) -> dict:
    epochs = [
        {"tau": ep.tau, "rate": ep.rate, "length": ep.length, "overflow_at_end": ep.overflow_at_end}
        for ep in outcome.epochs
    ]
    if isinstance(outcome, Infeasible):
        return {
            "infeasible": True,
            "q": _finite(outcome.q),
            "required": outcome.required,
            "achievable": outcome.achievable,
            "tau": outcome.tau,
            "cause": outcome.cause,
            "epochs": epochs,
        }
    return {
        "T": outcome.T,
        "epochs": epochs,
        "overflows": [list(o) for o in outcome.overflows],
        "energy_spent": outcome.energy_spent,
    }


def schedule_from_dict(doc: dict) -> Schedule:
    _check(doc, SCHEDULE_SCHEMA, "schedule")
    epochs = tuple(
        Epoch(e["tau"], e["rate"], e["length"], e.get("overflow_at_end", 0.0)) for e in doc["epochs"]
    )
    overflows = tuple((float(t), float(o)) for t, o in doc.get("overflows", []))
    spent = doc.get("energy_spent")
    return Schedule(epochs, doc["T"], overflows, math.nan if spent is None else spent)


def load_schedule(path) -> Schedule:
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    if doc.get("infeasible"):
        raise InputError(f"{path}: file holds an infeasibility witness, not a schedule")
    try:
        return schedule_from_dict(doc)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
