import numpy as np
import pytest

from cqc.dilation import DilatedGate, apply_postselected, apply_postselected_chain, dilate
from cqc.errors import DimensionError, NumericalError, PostSelectionError
from cqc.model import IMAGINARY_TIME, IsingParams, bond_hamiltonian, bond_propagator
from cqc.tensor_core import is_unitary


def test_identity_dilation():
    g = dilate(np.eye(4))
    assert g.scale == 1.0
    assert np.allclose(g.block(), np.eye(4))
    assert np.allclose(g.unitary[4:, :4], 0.0)
    psi = np.arange(4) + 1j
    out, prob = apply_postselected(g, psi / np.linalg.norm(psi))
    assert prob == pytest.approx(1.0)
    assert np.allclose(out, psi / np.linalg.norm(psi))


def test_projector_dilation():
    g = dilate(np.diag([1.0, 0.0]))
    assert g.scale == 1.0
    assert np.allclose(g.unitary[2:, :2], np.diag([0.0, 1.0]))
    out, prob = apply_postselected(g, np.array([1, 1]) / np.sqrt(2))
    assert prob == pytest.approx(0.5)
    assert np.allclose(out, [1, 0])
    with pytest.raises(PostSelectionError):
        apply_postselected(g, np.array([0.0, 1.0]))


def test_imaginary_trotter_gate_dilation():
    p = IsingParams(4, 1, 1.2, 0.1)
    a = bond_propagator(p, 2, 0.1, IMAGINARY_TIME)
    g = dilate(a)
    assert is_unitary(g.unitary, 1e-12)
    assert np.max(np.abs(g.block() - g.scale * a)) < 1e-12
    assert g.n_qubits == 2


def test_ground_eigenvector_is_accepted_with_certainty():
    p = IsingParams(2, 1, 1.2, 0.1)
    h = bond_hamiltonian(p, 1)
    _, vecs = np.linalg.eigh(h)
    g = dilate(bond_propagator(p, 1, 0.1, IMAGINARY_TIME))
    out, prob = apply_postselected(g, vecs[:, 0])
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert abs(abs(np.vdot(out, vecs[:, 0])) - 1) < 1e-12


def test_seeded_completion_is_reproducible(rng):
    a = rng.standard_normal((4, 4))
    assert np.array_equal(dilate(a, seed=3).unitary, dilate(a, seed=3).unitary)


def test_invalid_operators():
    with pytest.raises(DimensionError):
        dilate(np.eye(3))
    with pytest.raises(DimensionError):
        dilate(np.zeros((2, 4)))
    with pytest.raises(ValueError):
        dilate(np.zeros((2, 2)))
    with pytest.raises(NumericalError):
        dilate(np.array([[np.inf, 0], [0, 1]]))
    with pytest.raises(DimensionError):
        apply_postselected(dilate(np.eye(2)), np.ones(4))


def test_chain_multiplies_probabilities(rng):
    gates = [dilate(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)), seed=k) for k in range(3)]
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    out, total = apply_postselected_chain(gates, psi)
    ref = psi
    expected = 1.0
    for g in gates:
        expected *= g.success_prob(ref)
        ref = g.operator @ ref
        ref /= np.linalg.norm(ref)
    assert np.allclose(out, ref, atol=1e-12)
    assert total == pytest.approx(expected)
    assert isinstance(gates[0], DilatedGate)
