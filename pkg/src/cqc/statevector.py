"""Brute-force statevector routines, used as exact references for small chains."""

from __future__ import annotations

import numpy as np
import scipy.sparse.linalg as spla

from cqc.model import PAULI, IsingParams, TrotterStep, full_hamiltonian

MAX_QUBITS = 20


def zero_state(n_sites: int) -> np.ndarray:
    psi = np.zeros(2**n_sites, dtype=complex)
    psi[0] = 1.0
    return psi


def product_state(local_states) -> np.ndarray:
    psi = np.ones(1, dtype=complex)
    for v in local_states:
        psi = np.kron(psi, np.asarray(v, dtype=complex))
    return psi


def apply_gate(psi: np.ndarray, gate: np.ndarray, first_site: int, n_sites: int) -> np.ndarray:
    """Apply a ``k``-qubit gate to sites ``first_site .. first_site+k-1`` (1-based)."""
    k = int(round(np.log2(gate.shape[0])))
    t = psi.reshape(2 ** (first_site - 1), 2**k, 2 ** (n_sites - first_site - k + 1))
    return np.einsum("ab,xbz->xaz", gate, t).reshape(-1)


def apply_step(psi: np.ndarray, step: TrotterStep, n_sites: int) -> np.ndarray:
    for bond, g in step.gates:
        psi = apply_gate(psi, g, bond, n_sites)
    return psi


def expectation(psi: np.ndarray, op, site: int, n_sites: int) -> float:
    """``<psi|op_site|psi>`` for a single-site operator (or Pauli label)."""
    if isinstance(op, str):
        op = PAULI[op.lower()]
    t = psi.reshape(2 ** (site - 1), 2, -1)
    return float(np.real(np.einsum("xaz,ab,xbz->", t.conj(), op, t)))


def entanglement_entropy(psi: np.ndarray, n_left: int, n_sites: int) -> float:
    """Von Neumann entropy (natural log) of the first ``n_left`` sites."""
    s = np.linalg.svd(psi.reshape(2**n_left, 2 ** (n_sites - n_left)), compute_uv=False)
    p = s**2
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def evolve_exact(psi: np.ndarray, p: IsingParams, t: float, imaginary: bool = False) -> np.ndarray:
    """``exp(-iHt) psi`` (or normalized ``exp(-Ht) psi``) via a sparse Krylov action."""
    h = full_hamiltonian(p, sparse=True)
    out = spla.expm_multiply((-t if imaginary else -1j * t) * h, psi)
    if imaginary:
        out = out / np.linalg.norm(out)
    return out


def ground_state(p: IsingParams) -> tuple[float, np.ndarray]:
    """Exact ground energy and state by (sparse) diagonalization."""
    if p.n_sites <= 10:
        evals, evecs = np.linalg.eigh(full_hamiltonian(p))
        return float(evals[0]), evecs[:, 0]
    h = full_hamiltonian(p, sparse=True)
    evals, evecs = spla.eigsh(h, k=1, which="SA", tol=1e-14)
    return float(evals[0]), evecs[:, 0]
