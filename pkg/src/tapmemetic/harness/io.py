"""File formats: instances, assignments, reports and solver configs.

All documents are JSON objects. Processor indices in files are 1-based.

Instance::

    {"format": "tap-instance/1", "n": 2, "m": 2,
     "exec_time": [[2.0, 4.0], [3.0, 1.0]],
     "comm_delay": [[0.0, 1.0], [1.0, 0.0]],
     "comm_rate": [[0.0, 0.5], [0.5, 0.0]],
     "data_volume": [2.0, 2.0],
     "origin": [1, 1],
     "preexisting_load": [0.0, 0.0]}

Assignment::

    {"format": "tap-assignment/1", "target": [1, 2]}

Floats are written with ``repr`` precision, so parsing a serialized instance
reproduces it bit for bit.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from ..encoding import Bounds
from ..ga import GAConfig
from ..memetic import MemeticConfig
from ..model import Assignment, FitnessWeights, MetricsReport, ProblemInstance, QueueThreshold, ValidationError
from ..pso import PSOConfig

INSTANCE_FORMAT = "tap-instance/1"
ASSIGNMENT_FORMAT = "tap-assignment/1"
REPORT_FORMAT = "tap-report/1"


def _dump(doc: dict) -> str:
    """One top-level key per line; matrices get one row per line."""
    items = []
    for key, value in doc.items():
        if isinstance(value, list) and value and isinstance(value[0], list):
            rows = ",\n  ".join(json.dumps(row) for row in value)
            text = f"[\n  {rows}\n ]"
        else:
            text = json.dumps(value)
        items.append(f" {json.dumps(key)}: {text}")
    return "{\n" + ",\n".join(items) + "\n}\n"


def dumps_document(doc: dict) -> str:
    return _dump(doc)


def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "format": INSTANCE_FORMAT,
        "n": instance.num_tasks,
        "m": instance.num_processors,
        "exec_time": instance.exec_time.tolist(),
        "comm_delay": instance.comm_delay.tolist(),
        "comm_rate": instance.comm_rate.tolist(),
        "data_volume": instance.data_volume.tolist(),
        "origin": [int(c) + 1 for c in instance.origin],
        "preexisting_load": instance.preexisting_load.tolist(),
    }


def instance_from_dict(doc: dict) -> ProblemInstance:
    fmt = doc.get("format", INSTANCE_FORMAT)
    if fmt != INSTANCE_FORMAT:
        raise ValidationError(f"unsupported instance format {fmt!r}")
    required = ("n", "m", "exec_time", "comm_delay", "comm_rate", "data_volume", "origin", "preexisting_load")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ValidationError(f"instance is missing fields: {', '.join(missing)}")
    try:
        inst = ProblemInstance(
            exec_time=np.array(doc["exec_time"], dtype=float).reshape(doc["n"], doc["m"]),
            comm_delay=doc["comm_delay"],
            comm_rate=doc["comm_rate"],
            data_volume=doc["data_volume"],
            origin=np.asarray(doc["origin"], dtype=np.int64) - 1,
            preexisting_load=doc["preexisting_load"],
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed instance: {exc}") from exc
    return inst


def dumps_instance(instance: ProblemInstance) -> str:
    return _dump(instance_to_dict(instance))


def loads_instance(text: str) -> ProblemInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"instance is not valid JSON: {exc}") from exc
    return instance_from_dict(doc)


def write_instance(instance: ProblemInstance, path) -> None:
    Path(path).write_text(dumps_instance(instance))


def read_instance(path) -> ProblemInstance:
    return loads_instance(Path(path).read_text())


def dumps_assignment(assignment: Assignment) -> str:
    return _dump({"format": ASSIGNMENT_FORMAT, "target": assignment.one_based()})


def loads_assignment(text: str) -> Assignment:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"assignment is not valid JSON: {exc}") from exc
    if isinstance(doc, list):
        return Assignment.from_one_based(doc)
    if doc.get("format", ASSIGNMENT_FORMAT) != ASSIGNMENT_FORMAT or "target" not in doc:
        raise ValidationError("assignment must be a list or an object with a 'target' list")
    return Assignment.from_one_based(doc["target"])


def write_assignment(assignment: Assignment, path) -> None:
    Path(path).write_text(dumps_assignment(assignment))


def read_assignment(path) -> Assignment:
    return loads_assignment(Path(path).read_text())


def report_to_dict(report: MetricsReport) -> dict:
    return {"format": REPORT_FORMAT, **report.to_dict()}


# --- solver configuration documents -------------------------------------------

def build_config(cls, doc: dict | None, **fixed):
    """Instantiate a config dataclass, rejecting unknown keys."""
    doc = dict(doc or {})
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ValidationError(f"unknown {cls.__name__} keys: {', '.join(sorted(unknown))}")
    doc.update(fixed)
    return cls(**doc)


def ga_config_from_dict(doc: dict | None) -> GAConfig:
    return build_config(GAConfig, doc)


def pso_config_from_dict(doc: dict | None) -> PSOConfig:
    doc = dict(doc or {})
    if doc.get("bounds") is not None:
        doc["bounds"] = Bounds(**doc["bounds"])
    return build_config(PSOConfig, doc)


def memetic_config_from_dict(doc: dict | None, ga: GAConfig | None = None) -> MemeticConfig:
    doc = dict(doc or {})
    ga_cfg = ga_config_from_dict(doc.pop("ga")) if "ga" in doc else (ga or GAConfig())
    pso_cfg = pso_config_from_dict(doc.pop("pso", None))
    return build_config(MemeticConfig, doc, ga=ga_cfg, pso=pso_cfg)


def weights_from_dict(doc: dict | None) -> FitnessWeights:
    return build_config(FitnessWeights, doc)


def threshold_from_dict(doc: dict | None) -> QueueThreshold:
    return build_config(QueueThreshold, doc)


def read_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    return doc
