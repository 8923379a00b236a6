"""Gauge-randomized circuit variants and the circuit JSON format.

Two gates that act one after the other on the same qubit can absorb a random
single-qubit unitary and its inverse, ``U_b U_a = (U_b V^dagger)(V U_a)``.
The state is unchanged while the individual gates are scrambled, which is
useful for averaging over hardware errors that depend on the gate decomposition.

The file format is JSON::

    {"format": "cqc-circuit", "schema_version": 1, "n_sites": N, "order": M,
     "gates": [{"layer": i, "bond": j, "matrix": [[[re, im], ...], ...]}, ...],
     "gauge": {...}?, "dilated": [{"ancilla": true, "scale": s, ...}]?}

Floats are written with ``repr`` so a round trip is bit exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cqc.circuit import SequentialCircuit
from cqc.dilation import DilatedGate
from cqc.errors import SchemaError
from cqc.tensor_core import random_unitary

FORMAT = "cqc-circuit"
SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class GaugeVariant:
    """A circuit with random gauges inserted.

    ``inserted_gauges`` lists ``(location, V)`` where ``location`` names the
    qubit and the two gates ``(layer, bond)`` that ``V`` and ``V^dagger`` were
    absorbed into.
    """

    circuit: SequentialCircuit
    seed: int
    inserted_gauges: list = field(default_factory=list)


def wire_sequences(n_sites: int, order: int) -> dict[int, list[tuple[int, int, int]]]:
    """For each site, the gates touching it in application order as ``(layer, bond, leg)``."""
    wires: dict[int, list] = {q: [] for q in range(1, n_sites + 1)}
    for i in range(1, order + 1):
        for j in range(1, n_sites):
            wires[j].append((i, j, 0))
            wires[j + 1].append((i, j, 1))
    return wires


def _on_leg(v: np.ndarray, leg: int) -> np.ndarray:
    return np.kron(v, np.eye(2)) if leg == 0 else np.kron(np.eye(2), v)


def randomize_gauge(c: SequentialCircuit, seed: int, identity: bool = False) -> GaugeVariant:
    """Insert a Haar-random ``V^dagger V`` between every pair of consecutive gates on a qubit.

    Args:
        c: Circuit to scramble.
        seed: Seed of the random gauges.
        identity: Use ``V = 1`` everywhere (a no-op, for testing).
    """
    rng = np.random.default_rng(seed)
    g = np.array(c.gates)
    inserted = []
    for q, seq in wire_sequences(c.n_sites, c.order).items():
        for (ia, ja, la), (ib, jb, lb) in zip(seq, seq[1:]):
            v = np.eye(2, dtype=complex) if identity else random_unitary(2, rng)
            g[ia - 1, ja - 1] = _on_leg(v, la) @ g[ia - 1, ja - 1]
            g[ib - 1, jb - 1] = g[ib - 1, jb - 1] @ _on_leg(v.conj().T, lb)
            inserted.append(({"site": q, "after": (ia, ja), "before": (ib, jb)}, v))
    return GaugeVariant(circuit=SequentialCircuit(c.n_sites, g), seed=seed, inserted_gauges=inserted)


# ---------------------------------------------------------------- JSON


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _decode_matrix(obj, where: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(f"{where}: expected a non-empty list of rows")
    n = len(obj)
    if dim is not None and n != dim:
        raise SchemaError(f"{where}: expected {dim} rows, got {n}")
    out = np.empty((n, n), dtype=complex)
    for r, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{where}[{r}]: expected a row of {n} entries")
        for k, z in enumerate(row):
            ok = isinstance(z, list) and len(z) == 2 and all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in z
            )
            if not ok:
                raise SchemaError(f"{where}[{r}][{k}]: expected a [re, im] pair of numbers, got {z!r}")
            out[r, k] = complex(z[0], z[1])
    return out


def dilated_to_dict(g: DilatedGate, sites) -> dict:
    """JSON record of a dilated gate acting on ``sites`` plus one ancilla."""
    return {
        "ancilla": True,
        "sites": [int(s) for s in sites],
        "scale": float(g.scale),
        "seed": g.seed,
        "operator": _encode_matrix(g.operator),
        "matrix": _encode_matrix(g.unitary),
    }


def dilated_from_dict(d: dict, where: str = "dilated") -> tuple[DilatedGate, list[int]]:
    for key in ("ancilla", "sites", "scale", "operator", "matrix"):
        if key not in d:
            raise SchemaError(f"{where}: missing field {key!r}")
    if d["ancilla"] is not True:
        raise SchemaError(f"{where}.ancilla: expected true")
    op = _decode_matrix(d["operator"], f"{where}.operator")
    u = _decode_matrix(d["matrix"], f"{where}.matrix", 2 * op.shape[0])
    return DilatedGate(unitary=u, scale=float(d["scale"]), operator=op, seed=d.get("seed")), list(d["sites"])


def circuit_to_dict(c: SequentialCircuit, gauge: dict | None = None, dilated: list | None = None) -> dict:
    doc = {
        "format": FORMAT,
        "schema_version": SCHEMA_VERSION,
        "n_sites": c.n_sites,
        "order": c.order,
        "gates": [
            {"layer": i, "bond": j, "matrix": _encode_matrix(c.gate(i, j))} for i, j in c.application_order()
        ],
    }
    if gauge is not None:
        doc["gauge"] = gauge
    if dilated:
        doc["dilated"] = [dilated_to_dict(g, sites) for g, sites in dilated]
    return doc


def circuit_from_dict(doc) -> SequentialCircuit:
    """Validate a parsed document and build the circuit; errors name the offending field."""
    if not isinstance(doc, dict):
        raise SchemaError("top level: expected a JSON object")
    if doc.get("format") != FORMAT:
        raise SchemaError(f"format: expected {FORMAT!r}, got {doc.get('format')!r}")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"schema_version: unsupported version {version!r} (this reader handles {SCHEMA_VERSION})")
    for key in ("n_sites", "order", "gates"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
    n, m = doc["n_sites"], doc["order"]
    if not isinstance(n, int) or n < 2:
        raise SchemaError(f"n_sites: expected an integer >= 2, got {n!r}")
    if not isinstance(m, int) or m < 1:
        raise SchemaError(f"order: expected an integer >= 1, got {m!r}")
    gates = np.full((m, n - 1, 4, 4), np.nan, dtype=complex)
    if not isinstance(doc["gates"], list):
        raise SchemaError("gates: expected a list")
    for k, entry in enumerate(doc["gates"]):
        where = f"gates[{k}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: expected an object")
        i, j = entry.get("layer"), entry.get("bond")
        if not isinstance(i, int) or not 1 <= i <= m:
            raise SchemaError(f"{where}.layer: expected 1..{m}, got {i!r}")
        if not isinstance(j, int) or not 1 <= j <= n - 1:
            raise SchemaError(f"{where}.bond: expected 1..{n - 1}, got {j!r}")
        if not np.isnan(gates[i - 1, j - 1, 0, 0]):
            raise SchemaError(f"{where}: duplicate gate for layer {i}, bond {j}")
        gates[i - 1, j - 1] = _decode_matrix(entry.get("matrix"), f"{where}.matrix", 4)
    missing = [(i + 1, j + 1) for i in range(m) for j in range(n - 1) if np.isnan(gates[i, j, 0, 0])]
    if missing:
        raise SchemaError(f"gates: no entry for (layer, bond) {missing[0]} and {len(missing) - 1} more")
    return SequentialCircuit(n, gates)


def export_circuit(
    c: SequentialCircuit,
    path: str | Path | None = None,
    gauge: dict | None = None,
    dilated: list | None = None,
) -> str:
    """Serialize ``c`` (optionally with gauge metadata and dilated gates); write to ``path`` if given."""
    text = json.dumps(circuit_to_dict(c, gauge, dilated), indent=1)
    if path is not None:
        Path(path).write_text(text)
    return text


def import_circuit(source: str | Path) -> SequentialCircuit:
    """Read a circuit from a file path or a JSON string."""
    text = source
    if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
        text = Path(source).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return circuit_from_dict(doc)


def gauge_metadata(variants) -> dict:
    """Gauge block listing the seeds of a family of variants."""
    return {"seeds": [int(v.seed) for v in variants], "n_insertions": len(variants[0].inserted_gauges)}
