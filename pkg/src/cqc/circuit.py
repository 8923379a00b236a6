"""Order-M sequential (staircase) circuits and their relation to MPS.

A :class:`SequentialCircuit` holds ``M`` layers of ``N-1`` two-site unitaries.
Gate ``(i, j)`` (layer ``i``, bond ``j``, both 1-based) acts on sites ``j`` and
``j+1``.  The state is

    |Psi> = L_M ... L_2 L_1 |0...0>,   L_i = U_{i,N-1} ... U_{i,2} U_{i,1},

i.e. gates are applied layer by layer, bonds ascending within a layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cqc.errors import DimensionError, ResourceError
from cqc.mps import MpsState, _apply_two_site, _move, canonicalize, zero_mps
from cqc.statevector import MAX_QUBITS, apply_gate, zero_state
from cqc.tensor_core import DEFAULT_CUTOFF, qr_complete, random_unitary, svd


@dataclass(frozen=True, eq=False)
class SequentialCircuit:
    """Staircase circuit; ``gates`` has shape ``(M, N-1, 4, 4)``."""

    n_sites: int
    gates: np.ndarray

    def __post_init__(self):
        g = np.array(self.gates, dtype=complex)
        if g.ndim != 4 or g.shape[1] != self.n_sites - 1 or g.shape[2:] != (4, 4) or g.shape[0] < 1:
            raise DimensionError(f"gates must have shape (M, {self.n_sites - 1}, 4, 4), got {g.shape}")
        g.setflags(write=False)
        object.__setattr__(self, "gates", g)

    @property
    def order(self) -> int:
        return self.gates.shape[0]

    def gate(self, layer: int, bond: int) -> np.ndarray:
        return self.gates[layer - 1, bond - 1]

    def with_gate(self, layer: int, bond: int, u: np.ndarray) -> "SequentialCircuit":
        g = self.gates.copy()
        g[layer - 1, bond - 1] = u
        return SequentialCircuit(self.n_sites, g)

    def application_order(self):
        """``(layer, bond)`` pairs in the order the gates act on the state."""
        for i in range(1, self.order + 1):
            for j in range(1, self.n_sites):
                yield i, j

    def is_unitary(self, atol: float = 1e-12) -> bool:
        eye = np.eye(4)
        prods = np.einsum("mjba,mjbc->mjac", self.gates.conj(), self.gates)
        return bool(np.max(np.abs(prods - eye)) <= atol)


def identity_circuit(n_sites: int, order: int) -> SequentialCircuit:
    return SequentialCircuit(n_sites, np.broadcast_to(np.eye(4, dtype=complex), (order, n_sites - 1, 4, 4)))


def random_circuit(n_sites: int, order: int, rng: np.random.Generator | int | None = None) -> SequentialCircuit:
    """Every gate drawn from the Haar measure on U(4)."""
    rng = np.random.default_rng(rng)
    g = np.array([[random_unitary(4, rng) for _ in range(n_sites - 1)] for _ in range(order)])
    return SequentialCircuit(n_sites, g)


def near_identity_circuit(
    n_sites: int, order: int, angle: float = 1e-2, rng: np.random.Generator | int | None = None
) -> SequentialCircuit:
    """Identity gates times ``exp(i angle H)`` with random Hermitian ``H`` of unit norm."""
    rng = np.random.default_rng(rng)
    g = np.empty((order, n_sites - 1, 4, 4), dtype=complex)
    for i in range(order):
        for j in range(n_sites - 1):
            a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            h = a + a.conj().T
            h /= np.linalg.norm(h, 2)
            w, v = np.linalg.eigh(h)
            g[i, j] = (v * np.exp(1j * angle * w)) @ v.conj().T
    return SequentialCircuit(n_sites, g)


def product_state_circuit(local_unitaries) -> SequentialCircuit:
    """Order-1 circuit preparing ``(u_1|0>) (x) ... (x) (u_N|0>)``.

    Qubit ``k`` is last touched by gate ``k`` (first leg), so ``u_k`` rides on
    that gate; the final gate carries both ``u_{N-1}`` and ``u_N``.
    """
    us = [np.asarray(u, dtype=complex) for u in local_unitaries]
    n = len(us)
    g = np.empty((1, n - 1, 4, 4), dtype=complex)
    for j in range(1, n - 1):
        g[0, j - 1] = np.kron(us[j - 1], np.eye(2))
    g[0, n - 2] = np.kron(us[n - 2], us[n - 1])
    return SequentialCircuit(n, g)


# ---------------------------------------------------------------- evaluation


def apply_layer(
    state: MpsState,
    layer_gates: np.ndarray,
    inverse: bool = False,
    max_chi: int | None = None,
    cutoff: float = DEFAULT_CUTOFF,
) -> MpsState:
    """Apply one staircase layer ``L`` (or ``L^dagger`` when ``inverse``) to an MPS."""
    st = state if state.center is not None else canonicalize(state, 0)
    ts = st.copy_tensors()
    n = len(ts)
    if not inverse:
        c = _move(ts, st.center, 0)
        for j in range(n - 1):
            c, _ = _apply_two_site(ts, c, j, layer_gates[j], max_chi, cutoff, False, True)
    else:
        c = _move(ts, st.center, n - 1)
        for j in range(n - 2, -1, -1):
            c, _ = _apply_two_site(ts, c, j, layer_gates[j].conj().T, max_chi, cutoff, False, False)
    return MpsState(tuple(ts), center=c)


def circuit_to_mps(c: SequentialCircuit, cutoff: float = DEFAULT_CUTOFF) -> MpsState:
    """Exact MPS of the circuit state (bond dimension at most ``2^M``)."""
    state = zero_mps(c.n_sites)
    for i in range(c.order):
        state = apply_layer(state, c.gates[i], cutoff=cutoff)
    return state


def circuit_to_statevector(c: SequentialCircuit, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    if c.n_sites > max_qubits:
        raise ResourceError(f"{c.n_sites} qubits exceed the statevector cap of {max_qubits}")
    psi = zero_state(c.n_sites)
    for i, j in c.application_order():
        psi = apply_gate(psi, c.gate(i, j), j, c.n_sites)
    return psi


def circuit_depth(n_sites: int, order: int) -> int:
    """Depth of the staircase under as-soon-as-possible scheduling."""
    free = [0] * (n_sites + 1)
    depth = 0
    for _ in range(order):
        for j in range(1, n_sites):
            start = max(free[j], free[j + 1])
            free[j] = free[j + 1] = start + 1
            depth = max(depth, start + 1)
    return depth


# ---------------------------------------------------------------- parameter counting


@dataclass(frozen=True)
class ParamCount:
    total: int
    breakdown: dict = field(default_factory=dict)


def count_parameters(n_sites: int, order: int) -> ParamCount:
    """Independent real parameters of the order-M staircase acting on ``|0...0>``.

    The first gate sees two fixed qubits (``2d^2 - 1 = 7``), the rest of the
    first layer one fixed qubit (``2d^3 - d^2 = 12``), later gates none (16).
    """
    if n_sites < 2 or order < 1:
        raise ValueError("need n_sites >= 2 and order >= 1")
    breakdown = {}
    for i in range(1, order + 1):
        for j in range(1, n_sites):
            if i == 1:
                breakdown[(i, j)] = 7 if j == 1 else 12
            else:
                breakdown[(i, j)] = 16
    return ParamCount(total=sum(breakdown.values()), breakdown=breakdown)


def count_parameters_mps(n_sites: int, chi_profile) -> int:
    """Real parameters of a right-canonical MPS.

    ``chi_profile`` is either a maximal bond dimension (the position-dependent
    profile ``min(chi, 2^k, 2^(N-k))`` is used) or an explicit list of the
    ``N-1`` bond dimensions.  Each isometry ``C^p -> C^n`` contributes
    ``2np - p^2``; square ones (``n == p``) act on no fresh qubit and are
    absorbed into their left neighbour, so they add nothing.
    """
    if isinstance(chi_profile, (int, np.integer)):
        profile = [min(int(chi_profile), 2 ** min(k, n_sites - k)) for k in range(1, n_sites)]
    else:
        profile = [int(x) for x in chi_profile]
        if len(profile) != n_sites - 1:
            raise DimensionError("chi_profile needs N-1 entries")
    dims = [1] + profile + [1]
    total = 0
    for k in range(1, n_sites + 1):
        n_rows = 2 * dims[k]
        p = dims[k - 1]
        if n_rows > p:
            total += 2 * n_rows * p - p * p
    return total


# ---------------------------------------------------------------- MPS -> circuit


@dataclass(frozen=True, eq=False)
class IsometricCircuit:
    """Sequential circuit of multi-qubit unitaries.

    ``gates[k] = (first_site, U)``: ``U`` acts on ``log2(U.shape[0])``
    consecutive sites starting at 1-based ``first_site``; gates are applied in
    list order to ``|0...0>``.
    """

    n_sites: int
    gates: tuple

    def to_statevector(self) -> np.ndarray:
        psi = zero_state(self.n_sites)
        for site, u in self.gates:
            psi = apply_gate(psi, u, site, self.n_sites)
        return psi

    @property
    def max_gate_qubits(self) -> int:
        return max(int(round(math.log2(u.shape[0]))) for _, u in self.gates)

    def to_sequential(self) -> SequentialCircuit:
        """Rewrite a circuit of one- and two-qubit gates as an order-1 staircase."""
        n = self.n_sites
        bond = [np.eye(4, dtype=complex) for _ in range(n - 1)]
        for k, (site, u) in enumerate(self.gates, start=1):
            q = int(round(math.log2(u.shape[0])))
            if site != k or q > 2:
                raise DimensionError("only circuits with gate k on sites k[, k+1] map to an order-1 staircase")
            if q == 2:
                bond[k - 1] = u @ bond[k - 1]
            elif k < n:
                bond[k - 1] = np.kron(u, np.eye(2)) @ bond[k - 1]
            else:
                bond[n - 2] = np.kron(np.eye(2), u) @ bond[n - 2]
        return SequentialCircuit(n, np.array([bond]))


def compress_right_canonical(state: MpsState, max_chi: int | None = None, cutoff: float = DEFAULT_CUTOFF) -> MpsState:
    """Right-canonical form with minimal bonds (right-to-left SVD sweep)."""
    st = canonicalize(state, state.n_sites - 1)
    ts = st.copy_tensors()
    for k in range(len(ts) - 1, 0, -1):
        l, d, r = ts[k].shape
        res = svd(ts[k].reshape(l, d * r), 1, max_rank=max_chi, cutoff=cutoff)
        s = res.singular_values / np.linalg.norm(res.singular_values)
        ts[k] = res.right.reshape(res.rank, d, r)
        ts[k - 1] = np.tensordot(ts[k - 1], res.left * s[None, :], axes=(2, 0))
    ts[0] = ts[0] / np.linalg.norm(ts[0])
    return MpsState(tuple(ts), center=0)


def mps_to_circuit_exact(
    state: MpsState, rng: np.random.Generator | int | None = 0, cutoff: float = DEFAULT_CUTOFF
) -> IsometricCircuit:
    """Exact sequential circuit of ``(n+1)``-qubit unitaries for an MPS with ``chi <= 2^n``.

    Each right-canonical tensor ``B[k]`` is an isometry from the register
    ``alpha_{k-1}`` (on sites ``k..``) to ``(i_k, alpha_k)``; it is embedded as
    the columns of a unitary acting on the register plus fresh ``|0>`` qubits,
    with ``<i_k, alpha_k| U |alpha_{k-1}, 0> = B[k]``.  Bonds are zero-padded
    to powers of two and the unused columns completed by QR.
    """
    rng = np.random.default_rng(rng)
    st = compress_right_canonical(state, cutoff=cutoff)
    n = st.n_sites
    chis = [1] + st.bond_dims + [1]
    n_reg = max(int(math.ceil(math.log2(x))) if x > 1 else 0 for x in chis)
    qubits = [min(n_reg, k, n - k) for k in range(n + 1)]
    gates = []
    for k in range(1, n + 1):
        b = st.tensors[k - 1]
        chi_in, _, chi_out = b.shape
        q_in, q_out = qubits[k - 1], qubits[k]
        fresh = q_out - q_in + 1
        dim = 2 ** (q_out + 1)
        # rows (i_k, alpha_k padded), columns alpha_{k-1} for the real inputs
        iso = np.zeros((2, 2**q_out, chi_in), dtype=complex)
        iso[:, :chi_out, :] = b.transpose(1, 2, 0)
        iso = iso.reshape(dim, chi_in)
        u = qr_complete(np.concatenate([iso, np.zeros((dim, dim - chi_in))], axis=1), n_fixed=chi_in, rng=rng)
        # put column alpha_{k-1} at position alpha_{k-1} * 2^fresh (fresh qubits in |0>)
        real_cols = [a * 2**fresh for a in range(chi_in)]
        other_cols = [c for c in range(dim) if c not in set(real_cols)]
        full = np.empty_like(u)
        full[:, real_cols] = u[:, :chi_in]
        full[:, other_cols] = u[:, chi_in:]
        gates.append((k, full))
    return IsometricCircuit(n, tuple(gates))
