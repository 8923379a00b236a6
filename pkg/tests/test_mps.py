import numpy as np
import pytest

from cqc import mps
from cqc.errors import ConvergenceError, DimensionError, ResourceError
from cqc.model import REAL_TIME, X, Z, IsingParams, full_hamiltonian, trotter_step
from cqc.statevector import apply_step, entanglement_entropy, expectation, ground_state
from cqc.tensor_core import random_unitary
from conftest import random_state


def test_statevector_round_trip(rng):
    psi = random_state(6, rng)
    st = mps.from_statevector(psi)
    assert np.allclose(mps.to_statevector(st), psi)
    assert st.max_bond == 8


def test_from_statevector_truncates(rng):
    psi = random_state(6, rng)
    st = mps.from_statevector(psi, max_chi=2)
    assert st.max_bond == 2
    assert abs(mps.overlap(st, st)) == pytest.approx(1.0)


def test_canonical_forms(rng):
    st = mps.random_mps(7, 4, rng)
    assert mps.is_right_canonical(st)
    psi = mps.to_statevector(st)
    for c in (0, 3, 6):
        moved = mps.move_center(st, c)
        assert moved.center == c
        assert np.allclose(mps.to_statevector(moved), psi)
    assert mps.canonicalize(st, 6).canonical_form == "left"
    assert mps.canonicalize(st, 3).canonical_form == "mixed"


def test_boundary_validation():
    with pytest.raises(DimensionError):
        mps.MpsState((np.zeros((2, 2, 1)),))
    with pytest.raises(DimensionError):
        mps.MpsState((np.zeros((1, 2, 2)), np.zeros((3, 2, 1))))


def test_apply_gates_matches_statevector(rng):
    n = 6
    st = mps.random_mps(n, 4, rng)
    psi = mps.to_statevector(st)
    gates = [(b, random_unitary(4, rng)) for b in (1, 3, 5, 2, 4, 2)]
    out, err = mps.apply_gates(st, gates)
    for b, g in gates:
        from cqc.statevector import apply_gate

        psi = apply_gate(psi, g, b, n)
    assert err < 1e-20
    assert np.allclose(mps.to_statevector(out), psi)


def test_apply_two_site_rejects_bad_bond(rng):
    with pytest.raises(DimensionError):
        mps.apply_two_site(mps.zero_mps(3), 3, np.eye(4))


def test_bond_budget(rng):
    st = mps.random_mps(8, 16, rng)
    gates = [(b, random_unitary(4, rng)) for b in range(1, 8)]
    with pytest.raises(ResourceError):
        mps.apply_gates(st, gates, max_bond_budget=4)


def test_tebd_matches_trotterized_statevector():
    p = IsingParams(7, 1, 1.4, 0.1)
    step = trotter_step(p, 0.05, 4, REAL_TIME)
    states, err = mps.tebd_trajectory(mps.zero_mps(7), step, 20, sample_every=10)
    psi = np.zeros(2**7, dtype=complex)
    psi[0] = 1
    for _ in range(20):
        psi = apply_step(psi, step, 7)
    assert len(states) == 3
    assert abs(abs(np.vdot(psi, mps.to_statevector(states[-1]))) - 1) < 1e-12
    assert err < 1e-20


def test_measurements_match_statevector(rng):
    st = mps.random_mps(6, 4, rng)
    psi = mps.to_statevector(st)
    for bond in range(1, 6):
        assert mps.entanglement_entropy(st, bond) == pytest.approx(entanglement_entropy(psi, bond, 6), abs=1e-10)
    sz = mps.local_expectations(st, Z)
    for site in range(1, 7):
        assert sz[site - 1] == pytest.approx(expectation(psi, Z, site, 6), abs=1e-12)
        assert mps.local_expectation(st, site, "x") == pytest.approx(expectation(psi, X, site, 6), abs=1e-12)
    p = IsingParams(6, 0.9, 1.1, 0.2)
    assert mps.energy(st, p) == pytest.approx(np.vdot(psi, full_hamiltonian(p) @ psi).real, abs=1e-10)
    other = mps.random_mps(6, 2, rng)
    assert mps.overlap(other, st) == pytest.approx(np.vdot(mps.to_statevector(other), psi), abs=1e-12)


def test_schmidt_values_normalized(rng):
    st = mps.random_mps(6, 4, rng)
    s = mps.schmidt_values(st, 3)
    assert np.sum(s**2) == pytest.approx(1.0)
    assert mps.entropy_from_singulars(np.array([1.0])) == 0.0


def test_dmrg_matches_exact_diagonalization():
    p = IsingParams(8, 1, 1.2, 0.1)
    _, e = mps.dmrg_ground_state(p, 16)
    assert e == pytest.approx(ground_state(p)[0], abs=1e-9)


def test_dmrg_energy_decreases_with_chi():
    p = IsingParams(10, 1, 1.0, 0.2)
    energies = [mps.dmrg_ground_state(p, chi)[1] for chi in (1, 2, 4)]
    assert energies[0] > energies[1] > energies[2]


def test_dmrg_convergence_error():
    p = IsingParams(8, 1, 1.0, 0.1)
    with pytest.raises(ConvergenceError) as info:
        mps.dmrg_ground_state(p, 4, max_sweeps=1)
    state, e = info.value.best
    assert state.n_sites == 8 and np.isfinite(e)


def test_checkpoint_round_trip(tmp_path, rng):
    st = mps.random_mps(5, 4, rng)
    path = tmp_path / "s.npz"
    mps.save_mps(path, st)
    back = mps.load_mps(path)
    assert back.center == st.center
    for a, b in zip(st.tensors, back.tensors):
        assert np.array_equal(a, b)


def test_bond_profile():
    assert mps.bond_profile(6, 4) == [2, 4, 4, 4, 2]
