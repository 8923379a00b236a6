"""Finite matrix-product states: TEBD, DMRG, entropies, overlaps.

Site tensors have shape ``(left_bond, 2, right_bond)``.  Sites are 1-based in
the public API (``site``, ``bond`` arguments) and 0-based in the tensor list.
An :class:`MpsState` records its orthogonality ``center`` (0-based): every
tensor left of it is left-orthogonal and every tensor right of it is
right-orthogonal.  ``center=0`` is right-canonical form.

States are never mutated in place; every operation returns a new state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse.linalg as spla

from cqc.errors import ConvergenceError, DimensionError, ResourceError
from cqc.model import IMAGINARY_TIME, PAULI, IsingParams, TrotterStep, ising_mpo
from cqc.tensor_core import DEFAULT_CUTOFF, svd

MPS_FORMAT_VERSION = 1


@dataclass(frozen=True)
class MpsState:
    tensors: tuple[np.ndarray, ...]
    center: int | None = None

    def __post_init__(self):
        ts = self.tensors
        if not ts:
            raise DimensionError("an MPS needs at least one site")
        if ts[0].shape[0] != 1 or ts[-1].shape[2] != 1:
            raise DimensionError("boundary bond extents must be 1")
        for a, b in zip(ts[:-1], ts[1:]):
            if a.shape[2] != b.shape[0]:
                raise DimensionError(f"bond mismatch {a.shape} / {b.shape}")

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    @property
    def canonical_form(self) -> str | None:
        if self.center is None:
            return None
        if self.center == 0:
            return "right"
        if self.center == self.n_sites - 1:
            return "left"
        return "mixed"

    def copy_tensors(self) -> list[np.ndarray]:
        return list(self.tensors)


# ---------------------------------------------------------------- construction


def product_mps(local_states: Iterable[Sequence[complex]]) -> MpsState:
    tensors = []
    for v in local_states:
        v = np.asarray(v, dtype=complex)
        tensors.append((v / np.linalg.norm(v)).reshape(1, 2, 1))
    return MpsState(tuple(tensors), center=0)


def zero_mps(n_sites: int) -> MpsState:
    return product_mps([[1.0, 0.0]] * n_sites)


def bond_profile(n_sites: int, chi: int) -> list[int]:
    """Largest useful bond dimensions ``min(chi, 2^k, 2^(N-k))`` for bonds ``k = 1..N-1``."""
    return [min(chi, 2 ** min(k, n_sites - k)) for k in range(1, n_sites)]


def random_mps(n_sites: int, chi: int, rng: np.random.Generator | int | None = None) -> MpsState:
    """Random normalized MPS in right-canonical form with the full bond profile."""
    rng = np.random.default_rng(rng)
    dims = [1] + bond_profile(n_sites, chi) + [1]
    tensors = []
    for k in range(n_sites):
        shape = (dims[k], 2, dims[k + 1])
        tensors.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return canonicalize(MpsState(tuple(tensors)), center=0)


def from_statevector(psi: np.ndarray, max_chi: int | None = None, cutoff: float = DEFAULT_CUTOFF) -> MpsState:
    """Left-to-right SVD split of a statevector; the result is left-canonical."""
    psi = np.asarray(psi, dtype=complex)
    n = int(round(np.log2(psi.size)))
    if 2**n != psi.size:
        raise DimensionError("statevector length must be a power of two")
    rest = (psi / np.linalg.norm(psi)).reshape(1, -1)
    tensors = []
    for _ in range(n - 1):
        chi_l = rest.shape[0]
        res = svd(rest.reshape(chi_l * 2, -1), 1, max_rank=max_chi, cutoff=cutoff)
        tensors.append(res.left.reshape(chi_l, 2, res.rank))
        s = res.singular_values / np.linalg.norm(res.singular_values)
        rest = s[:, None] * res.right
    tensors.append(rest.reshape(rest.shape[0], 2, 1))
    return MpsState(tuple(tensors), center=n - 1)


def to_statevector(state: MpsState) -> np.ndarray:
    psi = state.tensors[0].reshape(2, -1)
    for t in state.tensors[1:]:
        psi = np.tensordot(psi, t, axes=(psi.ndim - 1, 0))
        psi = psi.reshape(-1, t.shape[2])
    return psi.reshape(-1)


# ---------------------------------------------------------------- gauge moves


def _qr_right(ts: list[np.ndarray], k: int) -> None:
    """Make site ``k`` left-orthogonal, pushing the remainder into ``k+1``."""
    l, d, r = ts[k].shape
    q, rr = np.linalg.qr(ts[k].reshape(l * d, r))
    ts[k] = q.reshape(l, d, q.shape[1])
    ts[k + 1] = np.tensordot(rr, ts[k + 1], axes=(1, 0))


def _qr_left(ts: list[np.ndarray], k: int) -> None:
    """Make site ``k`` right-orthogonal, pushing the remainder into ``k-1``."""
    l, d, r = ts[k].shape
    q, rr = np.linalg.qr(ts[k].reshape(l, d * r).conj().T)
    ts[k] = q.conj().T.reshape(q.shape[1], d, r)
    ts[k - 1] = np.tensordot(ts[k - 1], rr.conj().T, axes=(2, 0))


def _move(ts: list[np.ndarray], center: int, target: int) -> int:
    while center < target:
        _qr_right(ts, center)
        center += 1
    while center > target:
        _qr_left(ts, center)
        center -= 1
    return center


def canonicalize(state: MpsState, center: int = 0, normalize: bool = True) -> MpsState:
    """Bring ``state`` to mixed canonical form around 0-based ``center``."""
    ts = state.copy_tensors()
    n = len(ts)
    if state.center is None:
        c = _move(ts, 0, n - 1)
        c = _move(ts, c, 0)
    else:
        c = state.center
    c = _move(ts, c, center)
    if normalize:
        ts[c] = ts[c] / np.linalg.norm(ts[c])
    return MpsState(tuple(ts), center=c)


def move_center(state: MpsState, center: int) -> MpsState:
    if state.center is None:
        return canonicalize(state, center)
    ts = state.copy_tensors()
    c = _move(ts, state.center, center)
    return MpsState(tuple(ts), center=c)


def norm(state: MpsState) -> float:
    if state.center is not None:
        return float(np.linalg.norm(state.tensors[state.center]))
    return float(np.sqrt(abs(overlap(state, state))))


def is_right_canonical(state: MpsState, atol: float = 1e-10) -> bool:
    """Check the right-orthogonality condition on sites ``2..N``."""
    for t in state.tensors[1:]:
        m = t.reshape(t.shape[0], -1)
        if np.max(np.abs(m @ m.conj().T - np.eye(t.shape[0]))) > atol:
            return False
    return True


# ---------------------------------------------------------------- gates


def _apply_two_site(
    ts: list[np.ndarray],
    center: int,
    k: int,
    gate: np.ndarray,
    max_chi: int | None,
    cutoff: float,
    renormalize: bool,
    to_right: bool,
) -> tuple[int, float]:
    """Apply ``gate`` on 0-based sites ``k, k+1`` in the list ``ts`` (in place).

    Returns the new center and the discarded weight (relative to the norm).
    """
    if center < k:
        center = _move(ts, center, k)
    elif center > k + 1:
        center = _move(ts, center, k + 1)
    theta = np.tensordot(ts[k], ts[k + 1], axes=(2, 0))
    theta = np.tensordot(gate.reshape(2, 2, 2, 2), theta, axes=([2, 3], [1, 2]))
    theta = theta.transpose(2, 0, 1, 3)
    res = svd(theta, 2, max_rank=max_chi, cutoff=cutoff)
    s = res.singular_values
    total = float(np.sum(s**2) + res.discarded_weight)
    if renormalize or res.discarded_weight > 0.0:
        s = s / np.linalg.norm(s)
    if to_right:
        ts[k] = res.left
        ts[k + 1] = s[:, None, None] * res.right
        center = k + 1
    else:
        ts[k] = res.left * s[None, None, :]
        ts[k + 1] = res.right
        center = k
    return center, (res.discarded_weight / total if total > 0 else 0.0)


def apply_two_site(
    state: MpsState,
    bond: int,
    gate: np.ndarray,
    max_chi: int | None = None,
    cutoff: float = DEFAULT_CUTOFF,
    renormalize: bool = False,
    to_right: bool = True,
) -> tuple[MpsState, float]:
    """Apply a 4x4 gate on ``bond`` (sites ``bond, bond+1``), truncating by SVD."""
    if not 1 <= bond < state.n_sites:
        raise DimensionError(f"bond {bond} outside 1..{state.n_sites - 1}")
    st = state if state.center is not None else canonicalize(state, bond - 1)
    ts = st.copy_tensors()
    c, w = _apply_two_site(ts, st.center, bond - 1, gate, max_chi, cutoff, renormalize, to_right)
    return MpsState(tuple(ts), center=c), w


def apply_gates(
    state: MpsState,
    gates: Sequence[tuple[int, np.ndarray]],
    max_chi: int | None = None,
    cutoff: float = DEFAULT_CUTOFF,
    renormalize: bool = False,
    max_bond_budget: int | None = None,
) -> tuple[MpsState, float]:
    """Apply bond gates in the given order.

    Runs of gates on disjoint bonds commute, so each run is swept in whichever
    direction is closer to the current orthogonality center.
    """
    st = state if state.center is not None else canonicalize(state, 0)
    ts = st.copy_tensors()
    center = st.center
    total = 0.0
    for run in _commuting_runs(gates):
        lo = min(b for b, _ in run)
        hi = max(b for b, _ in run)
        ascending = abs(center - (lo - 1)) <= abs(center - hi)
        run = sorted(run, key=lambda bg: bg[0], reverse=not ascending)
        for b, g in run:
            center, w = _apply_two_site(ts, center, b - 1, g, max_chi, cutoff, renormalize, ascending)
            total += w
            if max_bond_budget is not None and ts[b - 1].shape[2] > max_bond_budget:
                raise ResourceError(f"bond dimension {ts[b - 1].shape[2]} exceeds budget {max_bond_budget}")
    return MpsState(tuple(ts), center=center), total


def _commuting_runs(gates):
    runs: list[list] = []
    used: set[int] = set()
    for b, g in gates:
        if runs and not ({b - 1, b, b + 1} & used):
            runs[-1].append((b, g))
            used.add(b)
        else:
            runs.append([(b, g)])
            used = {b}
    return runs


def tebd_evolve(
    state: MpsState,
    step: TrotterStep,
    max_chi: int | None = None,
    cutoff: float = DEFAULT_CUTOFF,
    max_bond_budget: int = 4096,
) -> tuple[MpsState, float]:
    """Apply one Trotter step.

    Non-unitary (imaginary-time) steps renormalize after every gate.  The
    second return value is the summed discarded weight.
    """
    renorm = step.kind == IMAGINARY_TIME
    budget = None if max_chi is not None else max_bond_budget
    new, err = apply_gates(state, step.gates, max_chi, cutoff, renormalize=renorm, max_bond_budget=budget)
    return new, err


def tebd_trajectory(
    state: MpsState,
    step: TrotterStep,
    n_steps: int,
    max_chi: int | None = None,
    cutoff: float = DEFAULT_CUTOFF,
    sample_every: int = 1,
) -> tuple[list[MpsState], float]:
    """Repeat ``step``; returns the states after every ``sample_every`` steps (and at 0)."""
    states = [state]
    total = 0.0
    for k in range(1, n_steps + 1):
        state, err = tebd_evolve(state, step, max_chi, cutoff)
        total += err
        if k % sample_every == 0:
            states.append(state)
    return states, total


# ---------------------------------------------------------------- measurements


def overlap(a: MpsState, b: MpsState) -> complex:
    """``<a|b>`` by a left-to-right transfer-matrix contraction."""
    if a.n_sites != b.n_sites:
        raise DimensionError(f"overlap of {a.n_sites}-site and {b.n_sites}-site states")
    env = np.ones((1, 1), dtype=complex)
    for ta, tb in zip(a.tensors, b.tensors):
        env = np.tensordot(env, tb, axes=(1, 0))
        env = np.tensordot(ta.conj(), env, axes=([0, 1], [0, 1]))
    return complex(env[0, 0])


def schmidt_values(state: MpsState, bond: int) -> np.ndarray:
    """Singular values across ``bond`` (between sites ``bond`` and ``bond+1``)."""
    st = move_center(state, bond - 1)
    t = st.tensors[bond - 1]
    s = np.linalg.svd(t.reshape(-1, t.shape[2]), compute_uv=False)
    return s / np.linalg.norm(s)


def entropy_from_singulars(s: np.ndarray) -> float:
    p = np.asarray(s, dtype=float) ** 2
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def entanglement_entropy(state: MpsState, bond: int) -> float:
    """Von Neumann entropy (natural log) across ``bond``."""
    return entropy_from_singulars(schmidt_values(state, bond))


def half_chain_entropy(state: MpsState) -> float:
    """Entropy across the central bond ``N // 2``."""
    return entanglement_entropy(state, state.n_sites // 2)


def local_expectation(state: MpsState, site: int, op) -> float:
    """``<op>`` on 1-based ``site``; ``op`` is a 2x2 Hermitian matrix or Pauli label."""
    if isinstance(op, str):
        op = PAULI[op.lower()]
    st = move_center(state, site - 1)
    t = st.tensors[site - 1]
    val = np.einsum("apb,pq,aqb->", t.conj(), op, t) / np.vdot(t, t)
    return float(np.real(val))


def local_expectations(state: MpsState, op) -> np.ndarray:
    """``<op>`` on every site, in one sweep of the orthogonality center."""
    if isinstance(op, str):
        op = PAULI[op.lower()]
    st = state if state.center is not None else canonicalize(state, 0)
    ts = st.copy_tensors()
    c = _move(ts, st.center, 0)
    out = np.empty(len(ts))
    for k in range(len(ts)):
        c = _move(ts, c, k)
        t = ts[k]
        out[k] = np.real(np.einsum("apb,pq,aqb->", t.conj(), op, t) / np.vdot(t, t))
    return out


def mpo_expectation(state: MpsState, mpo: Sequence[np.ndarray]) -> complex:
    """``<psi|W|psi>`` for an MPO with tensors ``(w_left, out, in, w_right)``."""
    env = np.ones((1, 1, 1), dtype=complex)
    for t, w in zip(state.tensors, mpo):
        env = _left_env_step(env, t, w)
    return complex(env[0, 0, 0])


def energy(state: MpsState, p: IsingParams) -> float:
    return float(np.real(mpo_expectation(state, ising_mpo(p)))) / norm(state) ** 2


# ---------------------------------------------------------------- DMRG


def _left_env_step(env, a, w):
    # env[x, w, y]: x bra bond, y ket bond
    t = np.tensordot(env, a, axes=(2, 0))  # x w q b
    t = np.tensordot(t, w, axes=([1, 2], [0, 2]))  # x b p v
    t = np.tensordot(a.conj(), t, axes=([0, 1], [0, 2]))  # a b v
    return t.transpose(0, 2, 1)


def _right_env_step(env, b, w):
    # env[a, u, b]
    t = np.tensordot(b, env, axes=(2, 2))  # y q a u
    t = np.tensordot(w, t, axes=([2, 3], [1, 3]))  # w p y a
    t = np.tensordot(b.conj(), t, axes=([1, 2], [1, 3]))  # x w y
    return t


def _lowest_eig(matvec, dim, v0, dense_builder, dense_limit=256):
    if dim <= dense_limit:
        h = dense_builder()
        h = 0.5 * (h + h.conj().T)
        evals, evecs = np.linalg.eigh(h)
        return float(evals[0]), evecs[:, 0]
    op = spla.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    evals, evecs = spla.eigsh(op, k=1, which="SA", v0=v0, tol=1e-13, ncv=min(dim, 24))
    return float(evals[0]), evecs[:, 0]


def _two_site_problem(lenv, w1, w2, renv, shape):
    def matvec(v):
        t = v.reshape(shape)
        t = np.tensordot(lenv, t, axes=(2, 0))  # x w q1 q2 b
        t = np.tensordot(t, w1, axes=([1, 2], [0, 2]))  # x q2 b p1 v
        t = np.tensordot(t, w2, axes=([4, 1], [0, 2]))  # x b p1 p2 u
        t = np.tensordot(t, renv, axes=([4, 1], [1, 2]))  # x p1 p2 a
        return t.reshape(-1)

    def dense():
        h = np.einsum("xwy,wpqv,vrsu,aub->xprayqsb", lenv, w1, w2, renv)
        d = int(np.prod(shape))
        return h.reshape(d, d)

    return matvec, dense


def _one_site_problem(lenv, w, renv, shape):
    def matvec(v):
        t = v.reshape(shape)
        t = np.tensordot(lenv, t, axes=(2, 0))  # x w q b
        t = np.tensordot(t, w, axes=([1, 2], [0, 2]))  # x b p v
        t = np.tensordot(t, renv, axes=([3, 1], [1, 2]))  # x p a
        return t.reshape(-1)

    def dense():
        h = np.einsum("xwy,wpqv,avb->xpayqb", lenv, w, renv)
        d = int(np.prod(shape))
        return h.reshape(d, d)

    return matvec, dense


def dmrg_ground_state(
    p: IsingParams,
    chi: int,
    max_sweeps: int = 200,
    tol: float = 1e-12,
    rng: np.random.Generator | int | None = 0,
    init: MpsState | None = None,
) -> tuple[MpsState, float]:
    """Variational ground state at bond dimension ``chi``.

    Two-site sweeps grow the bonds up to ``chi``; single-site sweeps then
    optimize on the fixed-bond manifold until the energy changes by less than
    ``tol`` per sweep.

    Raises:
        ConvergenceError: after ``max_sweeps`` sweeps, with the best
            ``(state, energy)`` attached.
    """
    if chi < 1:
        raise ValueError("chi must be >= 1")
    n = p.n_sites
    mpo = ising_mpo(p)
    state = canonicalize(init, 0) if init is not None else random_mps(n, min(chi, 2), rng)
    ts = state.copy_tensors()
    renvs: list = [None] * (n + 1)
    lenvs: list = [None] * (n + 1)
    lenvs[0] = np.ones((1, 1, 1), dtype=complex)
    renvs[n] = np.ones((1, 1, 1), dtype=complex)
    for k in range(n - 1, 0, -1):
        renvs[k] = _right_env_step(renvs[k + 1], ts[k], mpo[k])

    def two_site_sweep():
        e = 0.0
        for k in range(n - 1):
            e = _update_two(k, True)
        for k in range(n - 2, -1, -1):
            e = _update_two(k, False)
        return e

    def _update_two(k, to_right):
        theta = np.tensordot(ts[k], ts[k + 1], axes=(2, 0))
        shape = theta.shape
        mv, dense = _two_site_problem(lenvs[k], mpo[k], mpo[k + 1], renvs[k + 2], shape)
        e, v = _lowest_eig(mv, theta.size, theta.reshape(-1), dense)
        res = svd(v.reshape(shape), 2, max_rank=chi, cutoff=DEFAULT_CUTOFF)
        s = res.singular_values / np.linalg.norm(res.singular_values)
        if to_right:
            ts[k] = res.left
            ts[k + 1] = s[:, None, None] * res.right
            lenvs[k + 1] = _left_env_step(lenvs[k], ts[k], mpo[k])
        else:
            ts[k] = res.left * s[None, None, :]
            ts[k + 1] = res.right
            renvs[k + 1] = _right_env_step(renvs[k + 2], ts[k + 1], mpo[k + 1])
        return e

    def one_site_sweep():
        e = 0.0
        for k in range(n):
            e = _update_one(k, True)
        for k in range(n - 1, -1, -1):
            e = _update_one(k, False)
        return e

    def _update_one(k, to_right):
        t = ts[k]
        mv, dense = _one_site_problem(lenvs[k], mpo[k], renvs[k + 1], t.shape)
        e, v = _lowest_eig(mv, t.size, t.reshape(-1), dense)
        ts[k] = v.reshape(t.shape) / np.linalg.norm(v)
        if to_right and k < n - 1:
            _qr_right(ts, k)
            lenvs[k + 1] = _left_env_step(lenvs[k], ts[k], mpo[k])
        elif not to_right and k > 0:
            _qr_left(ts, k)
            renvs[k] = _right_env_step(renvs[k + 1], ts[k], mpo[k])
        return e

    best = np.inf
    previous = np.inf
    sweeps = 0
    # Two-site phase: grow bonds and get close to the optimum.
    while sweeps < max_sweeps:
        sweeps += 1
        e = two_site_sweep()
        if abs(previous - e) < 1e-10:
            break
        previous = e
    previous = np.inf
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        e = one_site_sweep()
        best = min(best, e)
        if abs(previous - e) < tol:
            converged = True
            break
        previous = e
    out = MpsState(tuple(ts), center=0)
    out = canonicalize(out, 0)
    e_final = energy(out, p)
    if not converged:
        raise ConvergenceError(f"DMRG not converged after {max_sweeps} sweeps", best=(out, e_final))
    return out, e_final


# ---------------------------------------------------------------- checkpoints


def save_mps(path: str | Path, state: MpsState) -> None:
    """Write ``state`` to an ``.npz`` container (one complex array per site + JSON header)."""
    header = {
        "format": "cqc-mps",
        "version": MPS_FORMAT_VERSION,
        "n_sites": state.n_sites,
        "center": state.center,
        "shapes": [list(t.shape) for t in state.tensors],
    }
    arrays = {f"site_{k}": t for k, t in enumerate(state.tensors)}
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header)), **arrays)


def load_mps(path: str | Path) -> MpsState:
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        if header.get("format") != "cqc-mps" or header.get("version") != MPS_FORMAT_VERSION:
            raise ValueError(f"unsupported MPS checkpoint header {header}")
        tensors = tuple(np.array(data[f"site_{k}"]) for k in range(header["n_sites"]))
    return MpsState(tensors, center=header["center"])
