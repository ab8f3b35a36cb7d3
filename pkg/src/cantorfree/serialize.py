"""JSON file formats for metrics, molecules, functions, and surgery plans.

The metric format stores the strict upper triangle row-major under "dist",
with rationals as "p/q" strings and doubles as JSON numbers.  Readers reject
wrong sizes, nonpositive distances, and matrices that fail validation, and
ignore unknown keys so writers may embed configuration headers.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction

import numpy as np

from .dyadic import DyadicMetric, validate_metric
from .errors import DegenerateMetricError, InvalidParameterError
from .freenorm import Molecule
from .lipfn import LipFn
from .numerics import RationalMatrix, as_fraction
from .surgery import PartitionSpec, SurgeryPlan


def _num_to_json(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return float(v)


def _num_from_json(v, mode):
    if mode == "rational":
        if isinstance(v, float):
            raise InvalidParameterError(
                "rational metric files must encode entries as strings")
        return as_fraction(v)
    return float(as_fraction(v)) if isinstance(v, str) else float(v)


def metric_to_dict(d: DyadicMetric, config=None) -> dict:
    n = d.n_points
    entries = []
    for i in range(n):
        for j in range(i + 1, n):
            entries.append(_num_to_json(d.entry(i, j)))
    out = {"depth": d.depth, "mode": d.mode, "dist": entries,
           "base_index": d.base_index}
    if d.meta:
        out["meta"] = _jsonable(d.meta)
    if config is not None:
        out["config"] = config
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def metric_from_dict(data: dict, validate: bool = True) -> DyadicMetric:
    try:
        depth = int(data["depth"])
        mode = data["mode"]
        entries = data["dist"]
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"malformed metric file: {exc}") from exc
    if mode not in ("rational", "double"):
        raise InvalidParameterError(f"unknown mode {mode!r}")
    if depth < 1:
        raise InvalidParameterError("depth must be at least 1")
    n = 1 << depth
    if len(entries) != n * (n - 1) // 2:
        raise InvalidParameterError(
            f"expected {n * (n - 1) // 2} upper-triangle entries, "
            f"got {len(entries)}")
    vals = [_num_from_json(v, mode) for v in entries]
    if any(v <= 0 for v in vals):
        raise DegenerateMetricError("distances must be strictly positive")
    base_index = int(data.get("base_index", 0))
    if mode == "rational":
        rows = [[Fraction(0)] * n for _ in range(n)]
    else:
        rows = [[0.0] * n for _ in range(n)]
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            rows[i][j] = vals[k]
            rows[j][i] = vals[k]
            k += 1
    if mode == "rational":
        matrix = RationalMatrix.from_fractions(rows)
    else:
        matrix = np.array(rows, dtype=np.float64)
    d = DyadicMetric(depth, matrix, mode, base_index=base_index)
    if validate:
        diag = validate_metric(d)
        if not diag.accepted:
            raise InvalidParameterError(
                f"file does not encode a metric: {diag.summary()}")
    return d


def save_metric(d: DyadicMetric, path, config=None) -> None:
    write_json(metric_to_dict(d, config=config), path)


def load_metric(path, validate: bool = True) -> DyadicMetric:
    with open(path, "r", encoding="utf-8") as fh:
        return metric_from_dict(json.load(fh), validate=validate)


# -- molecules ---------------------------------------------------------------


def molecule_to_dict(mol: Molecule) -> dict:
    return {"weights": {str(i): _num_to_json(w) for i, w in mol.weights}}


def molecule_from_dict(data: dict, mode: str = "rational") -> Molecule:
    try:
        raw = data["weights"]
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"malformed molecule file: {exc}") from exc
    conv = as_fraction if mode == "rational" else float
    return Molecule.from_mapping({int(k): conv(v) for k, v in raw.items()})


# -- Lipschitz functions -----------------------------------------------------


def lipfn_to_dict(f: LipFn) -> dict:
    return {"values": [_num_to_json(v) for v in f.values],
            "base_index": f.base_index}


def lipfn_from_dict(data: dict, mode: str = "rational") -> LipFn:
    conv = as_fraction if mode == "rational" else float
    return LipFn(tuple(conv(v) for v in data["values"]),
                 int(data.get("base_index", 0)))


# -- surgery plans -----------------------------------------------------------


def plan_to_dict(plan: SurgeryPlan) -> dict:
    return {
        "target": [str(a) for a in plan.partition.target],
        "pieces": [[str(a) for a in piece] for piece in plan.partition.pieces],
        "replacements": [None if r is None else metric_to_dict(r)
                         for r in plan.replacements],
        "epsilon": _num_to_json(plan.epsilon),
        "delta": _num_to_json(plan.delta),
    }


def plan_from_dict(data: dict, base_dir=".", mode: str = "rational") -> SurgeryPlan:
    try:
        partition = PartitionSpec(
            target=tuple(data["target"]),
            pieces=tuple(tuple(piece) for piece in data["pieces"]),
        )
        raw_reps = data["replacements"]
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"malformed plan file: {exc}") from exc
    reps = []
    for r in raw_reps:
        if r is None:
            reps.append(None)
        elif isinstance(r, dict) and "file" in r:
            reps.append(load_metric(os.path.join(base_dir, r["file"])))
        else:
            reps.append(metric_from_dict(r))
    conv = as_fraction if mode == "rational" else float
    return SurgeryPlan(partition=partition, replacements=tuple(reps),
                       epsilon=conv(data["epsilon"]), delta=conv(data["delta"]))


# -- deterministic writers ---------------------------------------------------


def write_json(obj, path) -> None:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
