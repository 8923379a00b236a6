"""Ising chain with transverse and longitudinal fields, and its Trotter steps.

    H = -J [ sum_j X_j X_{j+1} + g sum_j Z_j + h sum_j X_j ]

Bonds are numbered ``1 .. N-1`` (bond ``j`` couples sites ``j`` and ``j+1``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp

from cqc.errors import DimensionError

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": X, "y": Y, "z": Z, "i": I2}

REAL_TIME = "real_time_unitary"
IMAGINARY_TIME = "imaginary_time_nonunitary"

# Forest-Ruth / Suzuki three-fold symmetric composition weight.
_FR_THETA = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))


@dataclass(frozen=True)
class IsingParams:
    n_sites: int
    coupling: float = 1.0
    transverse: float = 0.0
    longitudinal: float = 0.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites}")

    @property
    def n_bonds(self) -> int:
        return self.n_sites - 1


def field_weights(n_sites: int, bond: int) -> tuple[float, float]:
    """Share of the single-site fields carried by ``bond``.

    Edge sites belong to a single bond and give it their full field; interior
    sites are split evenly between their two bonds.
    """
    w_left = 1.0 if bond == 1 else 0.5
    w_right = 1.0 if bond + 1 == n_sites else 0.5
    return w_left, w_right


def bond_hamiltonian(p: IsingParams, bond: int) -> np.ndarray:
    """4x4 Hermitian term of ``bond`` such that the terms sum to ``H``."""
    if not 1 <= bond <= p.n_bonds:
        raise DimensionError(f"bond {bond} outside 1..{p.n_bonds}")
    w_left, w_right = field_weights(p.n_sites, bond)
    local = p.transverse * Z + p.longitudinal * X
    h = np.kron(X, X) + w_left * np.kron(local, I2) + w_right * np.kron(I2, local)
    return -p.coupling * h


def site_operator(op: np.ndarray, site: int, n_sites: int, sparse: bool = False):
    """``op`` acting on 1-based ``site`` of an ``n_sites`` chain."""
    if sparse:
        left = sp.identity(2 ** (site - 1), format="csr", dtype=complex)
        right = sp.identity(2 ** (n_sites - site), format="csr", dtype=complex)
        return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")
    return reduce(np.kron, [op if k == site else I2 for k in range(1, n_sites + 1)])


def full_hamiltonian(p: IsingParams, sparse: bool = False):
    """The Hamiltonian as a dense (or CSR) ``2^N x 2^N`` matrix, built term by term."""
    n = p.n_sites
    if sparse:
        h = sp.csr_matrix((2**n, 2**n), dtype=complex)
    else:
        h = np.zeros((2**n, 2**n), dtype=complex)
    for j in range(1, n):
        h = h - p.coupling * (site_operator(X, j, n, sparse) @ site_operator(X, j + 1, n, sparse))
    for j in range(1, n + 1):
        h = h - p.coupling * p.transverse * site_operator(Z, j, n, sparse)
        h = h - p.coupling * p.longitudinal * site_operator(X, j, n, sparse)
    return h


def ising_mpo(p: IsingParams) -> list[np.ndarray]:
    """Bond-dimension-3 MPO, tensors shaped ``(w_left, out, in, w_right)``."""
    J, g, h = p.coupling, p.transverse, p.longitudinal
    w = np.zeros((3, 3, 2, 2), dtype=complex)
    w[0, 0] = I2
    w[1, 0] = X
    w[2, 0] = -J * (g * Z + h * X)
    w[2, 1] = -J * X
    w[2, 2] = I2
    w = w.transpose(0, 2, 3, 1)
    tensors = [w.copy() for _ in range(p.n_sites)]
    tensors[0] = w[2:3].copy()
    tensors[-1] = w[:, :, :, 0:1].copy()
    return tensors


def _exp_hermitian(h: np.ndarray, coeff: complex) -> np.ndarray:
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(coeff * evals)) @ evecs.conj().T


def bond_propagator(p: IsingParams, bond: int, dt: float, kind: str = REAL_TIME) -> np.ndarray:
    """``exp(-i h_bond dt)`` (real time) or ``exp(-h_bond dt)`` (imaginary time)."""
    h = bond_hamiltonian(p, bond)
    if kind == REAL_TIME:
        return _exp_hermitian(h, -1j * dt)
    if kind == IMAGINARY_TIME:
        g = _exp_hermitian(h, -dt)
        if np.allclose(h.imag, 0.0):
            g = g.real.astype(complex)
        return g
    raise ValueError(f"unknown propagator kind {kind!r}")


@dataclass(frozen=True)
class TrotterStep:
    """Ordered bond gates of one Trotter step; ``gates[0]`` is applied first."""

    gates: tuple[tuple[int, np.ndarray], ...]
    dt: float
    order: int
    kind: str
    n_sites: int = field(default=0)

    def __len__(self) -> int:
        return len(self.gates)


def _second_order(p: IsingParams, dt: float, kind: str) -> list[tuple[int, np.ndarray]]:
    first = [j for j in range(1, p.n_sites) if j % 2 == 1]
    second = [j for j in range(1, p.n_sites) if j % 2 == 0]
    if not second:
        # N = 2: a single bond, the split is exact.
        return [(1, bond_propagator(p, 1, dt, kind))]
    gates = [(j, bond_propagator(p, j, dt / 2, kind)) for j in first]
    gates += [(j, bond_propagator(p, j, dt, kind)) for j in second]
    gates += [(j, bond_propagator(p, j, dt / 2, kind)) for j in first]
    return gates


def trotter_step(p: IsingParams, dt: float, order: int = 2, kind: str = REAL_TIME) -> TrotterStep:
    """One Trotter step of length ``dt``.

    Order 2 is the symmetric split ``A(dt/2) B(dt) A(dt/2)`` with ``A`` the
    bonds ``1, 3, 5, ...`` and ``B`` the bonds ``2, 4, ...``.  Order 4 composes
    three order-2 steps with the Forest-Ruth weights.
    """
    if kind == IMAGINARY_TIME and dt < 0:
        raise ValueError("imaginary-time steps need dt >= 0")
    if kind not in (REAL_TIME, IMAGINARY_TIME):
        raise ValueError(f"unknown step kind {kind!r}")
    if order == 2:
        gates = _second_order(p, dt, kind)
    elif order == 4:
        gates = []
        for w in (_FR_THETA, 1.0 - 2.0 * _FR_THETA, _FR_THETA):
            gates += _second_order(p, w * dt, kind)
    else:
        raise ValueError(f"unsupported Trotter order {order}; use 2 or 4")
    return TrotterStep(gates=tuple(gates), dt=dt, order=order, kind=kind, n_sites=p.n_sites)
