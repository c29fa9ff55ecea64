"""Problem-file parsing and report emission for the CLI.

Problem files are JSON documents with an explicit schema_version; they are
schema-validated before any numerics so malformed input yields a
path-to-field diagnostic instead of a numpy traceback.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import jsonschema
import numpy as np

from .model import Gains, Lipschitz, LureSystem, Monotone, NonlinearityClass, SectorBounded

SCHEMA_VERSION = 1

_MATRIX = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": {"type": "number"}},
}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "system", "nonlinearity", "eta"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "system": {
            "type": "object",
            "required": ["A", "B", "B_psi", "C", "domain"],
            "additionalProperties": False,
            "properties": {
                "A": _MATRIX,
                "B": _MATRIX,
                "B_psi": _MATRIX,
                "C": _MATRIX,
                "domain": {"enum": ["continuous", "discrete"]},
            },
        },
        "nonlinearity": {
            "type": "object",
            "required": ["variant"],
            "properties": {
                "variant": {"enum": ["lipschitz", "sector", "monotone"]},
                "rho": {"type": "number"},
                "theta_y": _MATRIX,
                "theta_psi": _MATRIX,
                "gamma": _MATRIX,
                "theta": _MATRIX,
            },
            "additionalProperties": False,
        },
        "eta": {"type": "number"},
        "gains": {
            "type": "object",
            "required": ["K", "K_psi"],
            "additionalProperties": False,
            "properties": {"K": _MATRIX, "K_psi": _MATRIX},
        },
        "builtin_psi": {
            "type": "array",
            "items": {"type": "string"},
            "minItems": 1,
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "margin_min": {"type": "number"},
                "max_iter": {"type": "integer"},
                "seed": {"type": "integer"},
            },
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "steps": {"type": "integer"},
                "t_end": {"type": "number"},
                "dt": {"type": "number"},
            },
        },
    },
}


class ProblemFileError(ValueError):
    """Problem file failed schema or consistency validation."""


@dataclass(frozen=True)
class Problem:
    system: LureSystem
    nonlinearity: NonlinearityClass
    eta: float
    gains: Optional[Gains] = None
    builtin_psi: tuple = ()
    solver_options: dict = field(default_factory=dict)
    simulation_options: dict = field(default_factory=dict)
    digest: str = ""


def _mat(doc, key):
    rows = doc[key]
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ProblemFileError(f"field {key!r}: rows have unequal lengths")
    return np.array(rows, dtype=float)


def _nonlinearity(doc) -> NonlinearityClass:
    variant = doc["variant"]
    needed = {
        "lipschitz": ("rho", "theta_y", "theta_psi"),
        "sector": ("gamma", "theta"),
        "monotone": ("gamma",),
    }[variant]
    missing = [k for k in needed if k not in doc]
    if missing:
        raise ProblemFileError(
            f"nonlinearity variant {variant!r} requires fields {missing}")
    extra = set(doc) - {"variant", *needed}
    if extra:
        raise ProblemFileError(
            f"nonlinearity variant {variant!r} has unexpected fields {sorted(extra)}")
    try:
        if variant == "lipschitz":
            return Lipschitz(rho=float(doc["rho"]), theta_y=_mat(doc, "theta_y"),
                             theta_psi=_mat(doc, "theta_psi"))
        if variant == "sector":
            return SectorBounded(gamma=_mat(doc, "gamma"), theta=_mat(doc, "theta"))
        return Monotone(gamma=_mat(doc, "gamma"))
    except ValueError as exc:
        raise ProblemFileError(f"nonlinearity: {exc}") from exc


def parse_problem(text: str) -> Problem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(doc, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "(document root)"
        raise ProblemFileError(f"schema violation at {path}: {exc.message}") from exc
    s = doc["system"]
    try:
        system = LureSystem(A=_mat(s, "A"), B=_mat(s, "B"), B_psi=_mat(s, "B_psi"),
                            C=_mat(s, "C"), domain=s["domain"])
    except ValueError as exc:
        raise ProblemFileError(f"system: {exc}") from exc
    nc = _nonlinearity(doc["nonlinearity"])
    gains = None
    if "gains" in doc:
        try:
            gains = Gains(K=_mat(doc["gains"], "K"), K_psi=_mat(doc["gains"], "K_psi"))
        except ValueError as exc:
            raise ProblemFileError(f"gains: {exc}") from exc
    digest = hashlib.sha256(text.encode()).hexdigest()
    return Problem(
        system=system, nonlinearity=nc, eta=float(doc["eta"]), gains=gains,
        builtin_psi=tuple(doc.get("builtin_psi", ())),
        solver_options=dict(doc.get("solver", {})),
        simulation_options=dict(doc.get("simulation", {})),
        digest=digest,
    )


def load_problem(path) -> Problem:
    with open(path) as fh:
        return parse_problem(fh.read())


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_report(path, command: str, digest: str, status: str, payload: dict,
                 wall_time: float, version: str):
    """Emit the machine-readable result document."""
    doc = {
        "command": command,
        "input_digest": digest,
        "status": status,
        "tool_version": version,
        "wall_time_seconds": wall_time,
        **_jsonable(payload),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return doc
