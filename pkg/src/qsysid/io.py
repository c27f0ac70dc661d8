"""JSON encoding of systems, topologies and schedules.

Complex numbers are ``[re, im]`` pairs (plain numbers are accepted on
input); matrices are row-major nested lists.  Topologies look like
``{"n": 3, "edges": [[0, 1, [1.0, 0.0]], ...], "control_set": [0],
"measured_node": 0}`` and schedules like ``{"segments": [[dt, [f1, ...]], ...]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from qsysid.dynamics import ControlSchedule
from qsysid.equivalence import KnownMask
from qsysid.infection import Topology
from qsysid.system import QuantumSystem

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """Input document does not match the expected layout."""


def load_json(path) -> dict:
    with open(Path(path)) as fh:
        return json.load(fh)


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(value, path: str) -> complex:
    if isinstance(value, bool):
        raise SchemaError(f"{path}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise SchemaError(f"{path}: expected a number or [re, im], got {value!r}")


def encode_matrix(A: np.ndarray) -> list:
    return [[encode_complex(z) for z in row] for row in np.asarray(A)]


def decode_matrix(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise SchemaError(f"{path}: expected a nested list matrix")
    n_cols = len(value[0])
    rows = []
    for i, row in enumerate(value):
        if len(row) != n_cols:
            raise SchemaError(f"{path}[{i}]: ragged matrix row")
        rows.append([decode_complex(z, f"{path}[{i}][{j}]") for j, z in enumerate(row)])
    return np.array(rows, dtype=complex)


def _require(doc: dict, key: str, path: str):
    if not isinstance(doc, dict):
        raise SchemaError(f"{path or '<root>'}: expected an object")
    if key not in doc:
        raise SchemaError(f"{path + '.' if path else ''}{key}: missing")
    return doc[key]


def parse_system(doc, path: str = "") -> QuantumSystem:
    """Validated :class:`QuantumSystem` from a document (or file path)."""
    if isinstance(doc, (str, Path)):
        doc = load_json(doc)
    pre = f"{path}." if path else ""
    drift = decode_matrix(_require(doc, "drift", path), f"{pre}drift")
    controls = [decode_matrix(m, f"{pre}controls[{k}]") for k, m in enumerate(doc.get("controls", []))]
    observables = [
        decode_matrix(m, f"{pre}observables[{l}]") for l, m in enumerate(_require(doc, "observables", path))
    ]
    rho = decode_matrix(_require(doc, "initial_state", path), f"{pre}initial_state")
    if "dim" in doc and doc["dim"] != drift.shape[0]:
        raise SchemaError(f"{pre}dim: {doc['dim']} does not match drift dimension {drift.shape[0]}")
    try:
        return QuantumSystem(drift, tuple(controls), tuple(observables), rho)
    except ValueError as exc:
        raise SchemaError(f"{pre}{exc}") from exc


def serialize_system(system: QuantumSystem) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": system.dim,
        "drift": encode_matrix(system.drift),
        "controls": [encode_matrix(H) for H in system.controls],
        "observables": [encode_matrix(M) for M in system.observables],
        "initial_state": encode_matrix(system.initial_state),
    }


def parse_known(doc, system: QuantumSystem, path: str = "known") -> KnownMask:
    if doc is None:
        return KnownMask()
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected an object")

    def flags(key, n):
        v = doc.get(key, [False] * n)
        if isinstance(v, bool):
            return (v,) * n
        if not isinstance(v, list) or len(v) != n or not all(isinstance(b, bool) for b in v):
            raise SchemaError(f"{path}.{key}: expected {n} booleans")
        return tuple(v)

    return KnownMask(
        drift=bool(doc.get("drift", False)),
        controls=flags("controls", system.n_controls),
        observables=flags("observables", system.n_observables),
        initial_state=bool(doc.get("initial_state", False)),
    )


def parse_topology(doc, path: str = "") -> Topology:
    if isinstance(doc, (str, Path)):
        doc = load_json(doc)
    pre = f"{path}." if path else ""
    n = _require(doc, "n", path)
    if not isinstance(n, int) or isinstance(n, bool):
        raise SchemaError(f"{pre}n: expected an integer")
    edges = []
    for j, e in enumerate(_require(doc, "edges", path)):
        if not isinstance(e, list) or len(e) not in (2, 3):
            raise SchemaError(f"{pre}edges[{j}]: expected [n, m] or [n, m, coupling]")
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in e[:2]):
            raise SchemaError(f"{pre}edges[{j}]: node indices must be integers")
        c = decode_complex(e[2], f"{pre}edges[{j}][2]") if len(e) == 3 else 1.0
        edges.append((e[0], e[1], c))
    control = doc.get("control_set", [])
    measured = doc.get("measured_node")
    try:
        return Topology.from_edges(n, edges, control, measured)
    except ValueError as exc:
        raise SchemaError(f"{pre}{exc}") from exc


def serialize_topology(topology: Topology) -> dict:
    return {
        "n": topology.n_nodes,
        "edges": [[a, b, encode_complex(c)] for (a, b), c in topology.couplings.items()],
        "control_set": sorted(topology.control_set),
        "measured_node": topology.measured_node,
    }


def parse_schedule(doc, path: str = "schedule") -> ControlSchedule:
    segs = _require(doc, "segments", path)
    out = []
    for j, seg in enumerate(segs):
        if not isinstance(seg, list) or len(seg) != 2 or not isinstance(seg[1], list):
            raise SchemaError(f"{path}.segments[{j}]: expected [duration, [amplitudes...]]")
        out.append((seg[0], seg[1]))
    try:
        return ControlSchedule(tuple(out))
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def serialize_schedule(schedule: ControlSchedule) -> dict:
    return {"segments": [[dt, list(amps)] for dt, amps in schedule.segments]}


def couplings_to_json(couplings: dict) -> list:
    return [[a, b, encode_complex(c)] for (a, b), c in sorted(couplings.items())]
