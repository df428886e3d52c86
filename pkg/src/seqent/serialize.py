"""Scenario JSON, JSON-lines reports and CSV output.

Scenario schema::

    {"d": 2,
     "initial": {"kind": "pure" | "mixed" | "maximally_mixed",
                 "vector": [[re, im], ...]  |  "matrix": [[[re, im], ...], ...],
                 "seed": 7, "rank": 2},
     "steps": [{"basis": {"kind": "standard" | "fourier" | "rotation" | "haar",
                          "theta": 0.52, "seed": 3},
                "device": [1.0, 0.0]}],
     "track_reference": false}

``vector``/``matrix`` take precedence over ``seed``. Numbers are written with
12 significant digits; complex numbers are ``[re, im]`` pairs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable

import numpy as np

from .circuit import MeasurementStep, Scenario
from .qstate import DensityState, make_basis, maximally_mixed, pure_state, random_density, random_pure


class ScenarioError(ValueError):
    """The scenario document does not follow the schema."""


def fmt(x: float) -> str:
    """12-significant-digit decimal text; re-reading and re-formatting is the identity."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x + 0.0, ".12g")


def _complex(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ScenarioError(f"complex numbers are [re, im] pairs, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _initial_from(doc: dict, d: int) -> DensityState:
    kind = doc.get("kind")
    if kind == "maximally_mixed":
        return maximally_mixed(d)
    if kind == "pure":
        if "vector" in doc:
            vec = np.array([_complex(p) for p in doc["vector"]])
            if vec.size != d:
                raise ScenarioError(f"initial vector has length {vec.size}, expected {d}")
            return pure_state(vec)
        if "seed" in doc:
            return random_pure(d, int(doc["seed"]))
        raise ScenarioError("pure initial state needs 'vector' or 'seed'")
    if kind == "mixed":
        if "matrix" in doc:
            m = np.array([[_complex(p) for p in row] for row in doc["matrix"]])
            if m.shape != (d, d):
                raise ScenarioError(f"initial matrix has shape {m.shape}, expected {(d, d)}")
            return DensityState(m, (d,), ("S",))
        if "seed" in doc:
            return random_density(d, int(doc.get("rank", d)), int(doc["seed"]))
        raise ScenarioError("mixed initial state needs 'matrix' or 'seed'")
    raise ScenarioError(f"unknown initial kind {kind!r}")


def _basis_from(doc: dict, d: int):
    kind = doc.get("kind")
    if kind == "rotation":
        if "theta" not in doc:
            raise ScenarioError("rotation basis needs 'theta'")
        return make_basis(kind, d, float(doc["theta"]))
    if kind == "haar":
        if "seed" not in doc:
            raise ScenarioError("haar basis needs 'seed'")
        return make_basis(kind, d, int(doc["seed"]))
    if kind in ("standard", "fourier"):
        return make_basis(kind, d)
    raise ScenarioError(f"unknown basis kind {kind!r}")


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        d = int(doc["d"])
        init = _initial_from(doc["initial"], d)
        steps = []
        for st in doc["steps"]:
            b = _basis_from(st["basis"], d)
            dev = st.get("device")
            steps.append(MeasurementStep(b, None if dev is None else np.asarray(dev, dtype=float)))
        return Scenario(init, tuple(steps), bool(doc.get("track_reference", False)))
    except KeyError as exc:
        raise ScenarioError(f"missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from None


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return fmt(x)
        return float(fmt(x)) + 0.0
    return x


def record_line(rec: dict) -> str:
    return json.dumps(_jsonable(rec), sort_keys=True, allow_nan=False)


def write_jsonl(records: Iterable[dict], fh) -> None:
    for rec in records:
        fh.write(record_line(rec) + "\n")


def csv_text(header: list[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (fmt(v) if isinstance(v, (float, np.floating)) else v) for v in row])
    return buf.getvalue()
