import json

import numpy as np
import pytest

from cqc.circuit import circuit_to_statevector, random_circuit
from cqc.dilation import dilate
from cqc.errors import SchemaError
from cqc.export_gauge import (
    circuit_from_dict,
    circuit_to_dict,
    export_circuit,
    gauge_metadata,
    import_circuit,
    randomize_gauge,
    wire_sequences,
)
from cqc.model import X
from cqc.statevector import expectation


def test_wire_sequences_cover_every_gate_leg():
    wires = wire_sequences(4, 2)
    assert wires[1] == [(1, 1, 0), (2, 1, 0)]
    assert wires[2] == [(1, 1, 1), (1, 2, 0), (2, 1, 1), (2, 2, 0)]
    assert sum(len(v) for v in wires.values()) == 2 * 2 * 3


def test_identity_gauge_changes_nothing(rng):
    c = random_circuit(5, 2, rng)
    v = randomize_gauge(c, seed=0, identity=True)
    assert np.allclose(v.circuit.gates, c.gates)


def test_gauge_variants_preserve_state(rng):
    c = random_circuit(6, 3, rng)
    psi = circuit_to_statevector(c)
    for seed in range(5):
        v = randomize_gauge(c, seed)
        assert v.circuit.is_unitary(1e-12)
        assert not np.allclose(v.circuit.gates, c.gates)
        assert np.allclose(circuit_to_statevector(v.circuit), psi, atol=1e-12)
        sx = [expectation(circuit_to_statevector(v.circuit), X, j, 6) for j in range(1, 7)]
        assert np.allclose(sx, [expectation(psi, X, j, 6) for j in range(1, 7)], atol=1e-12)


def test_gauge_is_seeded(rng):
    c = random_circuit(4, 2, rng)
    a, b = randomize_gauge(c, 7), randomize_gauge(c, 7)
    assert np.array_equal(a.circuit.gates, b.circuit.gates)
    assert len(a.inserted_gauges) == 2 * 2 * 3 - 4
    assert gauge_metadata([a, b]) == {"seeds": [7, 7], "n_insertions": len(a.inserted_gauges)}


def test_round_trip_is_bit_exact(tmp_path, rng):
    c = random_circuit(5, 2, rng)
    path = tmp_path / "c.json"
    text = export_circuit(c, path)
    assert np.array_equal(import_circuit(path).gates, c.gates)
    assert np.array_equal(import_circuit(text).gates, c.gates)


def test_round_trip_with_dilated_gates(rng):
    c = random_circuit(3, 1, rng)
    g = dilate(rng.standard_normal((4, 4)), seed=2)
    doc = json.loads(export_circuit(c, dilated=[(g, [1, 2])], gauge={"seeds": [0]}))
    assert doc["dilated"][0]["ancilla"] is True and doc["gauge"] == {"seeds": [0]}
    from cqc.export_gauge import dilated_from_dict

    back, sites = dilated_from_dict(doc["dilated"][0])
    assert sites == [1, 2] and np.array_equal(back.unitary, g.unitary)


def test_minimal_fixture_file():
    text = """{"format": "cqc-circuit", "schema_version": 1, "n_sites": 2, "order": 1,
      "gates": [{"layer": 1, "bond": 1, "matrix": [[[1,0],[0,0],[0,0],[0,0]], [[0,0],[1,0],[0,0],[0,0]],
                                                 [[0,0],[0,0],[1,0],[0,0]], [[0,0],[0,0],[0,0],[1,0]]]}]}"""
    c = import_circuit(text)
    assert c.n_sites == 2 and c.order == 1 and np.allclose(c.gate(1, 1), np.eye(4))


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.update(schema_version=2), "schema_version"),
        (lambda d: d.update(format="other"), "format"),
        (lambda d: d.pop("n_sites"), "n_sites"),
        (lambda d: d["gates"].pop(), "no entry"),
        (lambda d: d["gates"].append(dict(d["gates"][0])), "duplicate"),
        (lambda d: d["gates"][0].update(layer=9), "gates[0].layer"),
        (lambda d: d["gates"][1]["matrix"][2].pop(), "gates[1].matrix[2]"),
        (lambda d: d["gates"][1]["matrix"][0].__setitem__(0, [1.0]), "gates[1].matrix[0][0]"),
    ],
)
def test_schema_errors_name_the_location(mutate, message, rng):
    doc = circuit_to_dict(random_circuit(3, 1, rng))
    mutate(doc)
    with pytest.raises(SchemaError, match=message.replace("[", r"\[").replace("]", r"\]")):
        circuit_from_dict(doc)


def test_malformed_json_reports_position():
    with pytest.raises(SchemaError, match="line 2 column"):
        import_circuit('{"format": "cqc-circuit",\n  "n_sites": }')
