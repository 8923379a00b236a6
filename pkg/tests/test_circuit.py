import numpy as np
import pytest
import scipy.linalg

from cqc import mps
from cqc.circuit import (
    IsometricCircuit,
    SequentialCircuit,
    circuit_depth,
    circuit_to_mps,
    circuit_to_statevector,
    compress_right_canonical,
    count_parameters,
    count_parameters_mps,
    identity_circuit,
    mps_to_circuit_exact,
    near_identity_circuit,
    product_state_circuit,
    random_circuit,
)
from cqc.errors import DimensionError, ResourceError
from cqc.statevector import apply_gate, zero_state
from cqc.tensor_core import is_unitary, random_unitary


def _direct(c: SequentialCircuit) -> np.ndarray:
    """Independent statevector: build each layer as a dense 2^N matrix."""
    n = c.n_sites
    psi = zero_state(n)
    for i in range(c.order):
        layer = np.eye(2**n, dtype=complex)
        for j in range(n - 1):
            full = np.kron(np.kron(np.eye(2**j), c.gates[i, j]), np.eye(2 ** (n - j - 2)))
            layer = full @ layer
        psi = layer @ psi
    return psi


def test_identity_circuit_is_zero_state():
    c = identity_circuit(5, 3)
    assert np.allclose(circuit_to_statevector(c), zero_state(5))
    st = circuit_to_mps(c)
    assert st.max_bond == 1


def test_x_gate_on_first_bond():
    x = np.array([[0, 1], [1, 0]])
    c = identity_circuit(3, 1).with_gate(1, 1, np.kron(x, x))
    psi = circuit_to_statevector(c)
    assert np.argmax(np.abs(psi)) == 0b110


@pytest.mark.parametrize("n, m", [(8, 1), (6, 2), (8, 3), (2, 2)])
def test_mps_and_statevector_paths_agree(n, m, rng):
    c = random_circuit(n, m, rng)
    psi = _direct(c)
    assert np.allclose(circuit_to_statevector(c), psi, atol=1e-12)
    st = circuit_to_mps(c)
    assert np.allclose(mps.to_statevector(st), psi, atol=1e-12)
    assert st.max_bond <= 2**m


def test_gate_shape_validation():
    with pytest.raises(DimensionError):
        SequentialCircuit(4, np.zeros((1, 2, 4, 4)))
    with pytest.raises(ResourceError):
        circuit_to_statevector(identity_circuit(4, 1), max_qubits=3)


def test_gates_are_read_only(rng):
    c = random_circuit(4, 2, rng)
    assert c.is_unitary()
    with pytest.raises(ValueError):
        c.gates[0, 0, 0, 0] = 2.0


def test_near_identity_is_unitary_and_close():
    c = near_identity_circuit(6, 2, angle=1e-3, rng=3)
    assert c.is_unitary()
    assert np.max(np.abs(c.gates - np.eye(4))) < 2e-3


def test_product_state_circuit(rng):
    us = [random_unitary(2, rng) for _ in range(5)]
    psi = circuit_to_statevector(product_state_circuit(us))
    ref = np.ones(1)
    for u in us:
        ref = np.kron(ref, u[:, 0])
    assert np.allclose(psi, ref)


def test_depth_formula():
    for n in range(3, 32):
        for m in range(1, 6):
            assert circuit_depth(n, m) == 2 * (m - 1) + n - 1
    # two sites: the layers stack directly
    assert circuit_depth(2, 4) == 4


def test_parameter_count_per_gate_values():
    assert count_parameters(2, 1).total == 7
    assert count_parameters(31, 1).total == 7 + 12 * 29 == 355
    for n in (2, 5, 31):
        for m in (1, 2, 5):
            pc = count_parameters(n, m)
            assert pc.total == 7 + 12 * (n - 2) + 16 * (m - 1) * (n - 1)
            assert pc.breakdown[(1, 1)] == 7
            assert all(v == 16 for (i, _), v in pc.breakdown.items() if i > 1)
    with pytest.raises(ValueError):
        count_parameters(1, 1)


def _jacobian_rank(c: SequentialCircuit) -> int:
    basis = []
    for a in range(4):
        for b in range(4):
            h = np.zeros((4, 4), complex)
            if a == b:
                h[a, a] = 1
            elif a < b:
                h[a, b] = h[b, a] = 1
            else:
                h[a, b], h[b, a] = 1j, -1j
            basis.append(h)
    psi0 = circuit_to_statevector(c)
    cols = []
    eps = 1e-7
    for i in range(c.order):
        for j in range(c.n_sites - 1):
            for h in basis:
                g = c.gates.copy()
                g[i, j] = scipy.linalg.expm(1j * eps * h) @ g[i, j]
                d = (circuit_to_statevector(SequentialCircuit(c.n_sites, g)) - psi0) / eps
                cols.append(np.concatenate([d.real, d.imag]))
    s = np.linalg.svd(np.array(cols).T, compute_uv=False)
    return int(np.sum(s > 1e-5 * s[0]))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_parameter_count_bounds_manifold_dimension(n, rng):
    # The per-gate count keeps the single-qubit gauge on each internal link
    # (4 real parameters), so for M = 1 the tangent space is 4(N-2) smaller.
    c = random_circuit(n, 1, rng)
    rank = _jacobian_rank(c)
    assert rank == count_parameters(n, 1).total - 4 * (n - 2)
    assert rank <= count_parameters(n, 1).total


def test_mps_parameter_count():
    assert count_parameters_mps(2, 2) == count_parameters(2, 1).total == 7
    # N = 4, chi = 2: isometries C^1->C^4, C^2->C^4, C^2->C^4 give 7, 12, 12;
    # the final square tensor adds nothing
    assert count_parameters_mps(4, 2) == 31
    assert count_parameters_mps(4, [2, 2, 2]) == 31
    for n in range(2, 12):
        assert count_parameters_mps(n, 2) == count_parameters(n, 1).total
    assert count_parameters_mps(6, 1) == count_parameters_mps(6, [1] * 5)
    with pytest.raises(DimensionError):
        count_parameters_mps(4, [2, 2])


def test_compress_right_canonical(rng):
    st = mps.canonicalize(mps.random_mps(7, 8, rng), 3)
    rc = compress_right_canonical(st)
    assert rc.center == 0 and mps.is_right_canonical(rc)
    assert abs(abs(mps.overlap(st, rc)) - 1) < 1e-12
    small = compress_right_canonical(st, max_chi=2)
    assert small.max_bond == 2


def test_chi2_mps_maps_to_order_one_circuit(rng):
    st = mps.random_mps(7, 2, rng)
    iso = mps_to_circuit_exact(st, rng=1)
    assert iso.max_gate_qubits == 2
    seq = iso.to_sequential()
    assert seq.order == 1 and seq.is_unitary()
    psi = mps.to_statevector(st)
    assert abs(abs(np.vdot(psi, circuit_to_statevector(seq))) - 1) < 1e-10


def test_chi4_mps_maps_to_three_site_unitaries(rng):
    st = mps.random_mps(6, 4, rng)
    iso = mps_to_circuit_exact(st, rng=2)
    assert iso.max_gate_qubits == 3
    assert all(is_unitary(u) for _, u in iso.gates)
    assert abs(abs(np.vdot(mps.to_statevector(st), iso.to_statevector())) - 1) < 1e-10
    with pytest.raises(DimensionError):
        iso.to_sequential()


def test_product_mps_maps_to_single_qubit_gates():
    st = mps.product_mps([[1, 1], [1, -1], [0, 1]])
    iso = mps_to_circuit_exact(st)
    assert iso.max_gate_qubits == 1
    assert np.allclose(np.abs(iso.to_statevector()), np.abs(mps.to_statevector(st)))


def test_isometric_circuit_manual():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    iso = IsometricCircuit(2, ((1, x), (2, np.eye(2))))
    assert np.allclose(iso.to_statevector(), apply_gate(zero_state(2), np.kron(x, np.eye(2)), 1, 2))
