"""Gate-by-gate polar-decomposition optimization of sequential circuits.

For gate ``(i, j)`` with every other gate fixed the overlap with a target is
linear in the gate, ``<T|Psi> = Tr[E U_ij]``, and ``U_ij <- polar(E)``
maximizes it.  Environments are assembled from three cached pieces per layer
``i``:

* ``psi[i]``: MPS of the layers below ``i`` applied to ``|0...0>``,
* ``phi[i]``: the target with the layers above ``i`` undone,
* left/right partial contractions of the staircase layer between them.

A gate update only invalidates the pieces that depend on it.  The energy
minimizer uses the same layout with the Hamiltonian MPO conjugated by the
layers above.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from cqc.circuit import SequentialCircuit, apply_layer, circuit_to_mps
from cqc.model import IsingParams, ising_mpo
from cqc.mps import MpsState, canonicalize, overlap, zero_mps
from cqc.mps import energy as mps_energy
from cqc.tensor_core import DEFAULT_CUTOFF, polar_unitary, svd


@dataclass(frozen=True)
class SweepConfig:
    """Stopping rules: at most ``max_iters`` sweeps; stop once the infidelity
    drops to ``abs_tol`` or its relative change per sweep drops to ``rel_tol``.

    ``anderson > 0`` turns on safeguarded Anderson extrapolation over that many
    past sweeps (see :class:`SweepAccelerator`); 0 gives the plain sweeps.
    """

    max_iters: int = 100_000
    abs_tol: float = 1e-12
    rel_tol: float = 1e-4
    anderson: int = 0

    def __post_init__(self):
        if self.max_iters <= 0 or self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("SweepConfig entries must be positive")
        if self.anderson < 0:
            raise ValueError("anderson history depth must be >= 0")


@dataclass
class SweepReport:
    final_fidelity: float
    iterations: int
    fidelity_trace: list[float] = field(default_factory=list)
    converged_by: str = "max_iters"
    overlap: complex = 0.0


@dataclass(frozen=True)
class GateEnvironment:
    """``matrix`` satisfies ``overlap = Tr[matrix @ U]`` for the excluded gate ``U``."""

    matrix: np.ndarray
    layer: int
    bond: int

    def overlap_with(self, u: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ u))


def _gates_checksum(gates: np.ndarray) -> int:
    return zlib.crc32(np.ascontiguousarray(gates).view(np.uint8))


def _as_gates(c) -> np.ndarray:
    return np.array(c.gates if isinstance(c, SequentialCircuit) else c, dtype=complex)


# ---------------------------------------------------------------- overlap environments


def _g4(u: np.ndarray) -> np.ndarray:
    return u.reshape(2, 2, 2, 2)


def _left_step(env, a_next, gate, b_cur):
    # env[a, c, b]; a_next[a, p, a']; gate[o, c', c, p]; b_cur[b, o, b']
    t = np.tensordot(env, a_next, axes=(0, 0))  # c b p a'
    t = np.tensordot(t, _g4(gate), axes=([0, 2], [2, 3]))  # b a' o c'
    t = np.tensordot(t, b_cur.conj(), axes=([0, 2], [0, 1]))  # a' c' b'
    return t


def _right_step(env, a_next, gate, b_cur):
    # env[a', c', b'] -> [a, c, b]
    t = np.tensordot(a_next, env, axes=(2, 0))  # a p c' b'
    t = np.tensordot(t, b_cur.conj(), axes=(3, 2))  # a p c' b o
    t = np.tensordot(t, _g4(gate), axes=([1, 4, 2], [3, 0, 1]))  # a b c
    return t.transpose(0, 2, 1)


class EnvironmentCache:
    """Cached partial contractions for ``<target| circuit>``.

    The cache owns a private copy of the gates; change them only through
    :meth:`update_gate`.  A checksum of the gate array is compared on every
    query and a mismatch triggers a full recompute.
    """

    def __init__(self, target: MpsState, circuit, cutoff: float = DEFAULT_CUTOFF):
        self.target = target if target.center is not None else canonicalize(target, 0)
        self.gates = _as_gates(circuit)
        self.order, nb = self.gates.shape[:2]
        self.n_sites = nb + 1
        if self.target.n_sites != self.n_sites:
            raise ValueError(f"target has {self.target.n_sites} sites, circuit {self.n_sites}")
        self.cutoff = cutoff
        self.full_recomputes = 0
        self._reset()

    def _reset(self):
        m, n = self.order, self.n_sites
        self._psi: list = [None] * m
        self._phi: list = [None] * m
        self._psi[0] = zero_mps(n)
        self._phi[m - 1] = self.target
        self._psi_valid = 0
        self._phi_valid = m - 1
        self._left = [[None] * n for _ in range(m)]
        self._right = [[None] * n for _ in range(m)]
        self._left_valid = [-1] * m
        self._right_valid = [n] * m
        self._checksum = _gates_checksum(self.gates)

    def _verify(self):
        if _gates_checksum(self.gates) != self._checksum:
            self.full_recomputes += 1
            self._reset()

    def circuit(self) -> SequentialCircuit:
        return SequentialCircuit(self.n_sites, self.gates.copy())

    def psi(self, i: int) -> MpsState:
        while self._psi_valid < i:
            k = self._psi_valid
            self._psi[k + 1] = apply_layer(self._psi[k], self.gates[k], cutoff=self.cutoff)
            self._psi_valid = k + 1
        return self._psi[i]

    def phi(self, i: int) -> MpsState:
        while self._phi_valid > i:
            k = self._phi_valid
            self._phi[k - 1] = apply_layer(self._phi[k], self.gates[k], inverse=True, cutoff=self.cutoff)
            self._phi_valid = k - 1
        return self._phi[i]

    def _left_env(self, i: int, j: int):
        if self._left_valid[i] < 0:
            a0 = self.psi(i).tensors[0]
            self._left[i][0] = a0[0].T.reshape(a0.shape[2], 2, 1)
            self._left_valid[i] = 0
        a = self.psi(i).tensors
        b = self.phi(i).tensors
        while self._left_valid[i] < j:
            k = self._left_valid[i]
            self._left[i][k + 1] = _left_step(self._left[i][k], a[k + 1], self.gates[i, k], b[k])
            self._left_valid[i] = k + 1
        return self._left[i][j]

    def _right_env(self, i: int, j: int):
        n = self.n_sites
        if self._right_valid[i] > n - 1:
            bl = self.phi(i).tensors[n - 1]
            self._right[i][n - 1] = bl.conj().transpose(2, 1, 0)
            self._right_valid[i] = n - 1
        a = self.psi(i).tensors
        b = self.phi(i).tensors
        while self._right_valid[i] > j:
            k = self._right_valid[i]
            self._right[i][k - 1] = _right_step(self._right[i][k], a[k], self.gates[i, k - 1], b[k - 1])
            self._right_valid[i] = k - 1
        return self._right[i][j]

    def environment(self, layer: int, bond: int) -> GateEnvironment:
        """Environment of gate ``(layer, bond)`` (1-based)."""
        self._verify()
        i, j = layer - 1, bond - 1
        left = self._left_env(i, j)
        right = self._right_env(i, j + 1)
        a = self.psi(i).tensors[j + 1]
        b = self.phi(i).tensors[j]
        t = np.tensordot(left, a, axes=(0, 0))  # c b p a'
        t = np.tensordot(t, b.conj(), axes=(1, 0))  # c p a' o b'
        t = np.tensordot(t, right, axes=([2, 4], [0, 2]))  # c p o c'
        return GateEnvironment(t.reshape(4, 4), layer, bond)

    def update_gate(self, layer: int, bond: int, u: np.ndarray) -> None:
        self._verify()
        i, j = layer - 1, bond - 1
        self.gates[i, j] = u
        self._psi_valid = min(self._psi_valid, i)
        self._phi_valid = max(self._phi_valid, i)
        for k in range(self.order):
            if k == i:
                self._left_valid[k] = min(self._left_valid[k], j)
                self._right_valid[k] = max(self._right_valid[k], j + 1)
            else:
                self._left_valid[k] = -1
                self._right_valid[k] = self.n_sites
        self._checksum = _gates_checksum(self.gates)

    def set_gates(self, gates) -> None:
        self.gates = _as_gates(gates)
        self._reset()

    def overlap(self) -> complex:
        env = self.environment(self.order, self.n_sites - 1)
        return env.overlap_with(self.gates[-1, -1])


def compute_environment(
    target: MpsState, c: SequentialCircuit, layer: int, bond: int, cache: EnvironmentCache | None = None
) -> GateEnvironment:
    """Environment ``E`` of gate ``(layer, bond)`` with ``<target|c> = Tr[E U]``.

    With a ``cache`` its partial contractions are reused; the cache must
    hold the gates of ``c`` (a mismatch is caught by the checksum).
    """
    if cache is None:
        cache = EnvironmentCache(target, c)
    elif not np.array_equal(cache.gates, c.gates):
        cache.gates[...] = c.gates
    return cache.environment(layer, bond)


def circuit_overlap(target: MpsState, c: SequentialCircuit) -> complex:
    """``<target|c>`` through the environment machinery."""
    return EnvironmentCache(target, c).overlap()


def polar_update(e: np.ndarray, current: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Optimal gate ``Y X^dagger`` for ``E = X S Y^dagger``, continuous in the current gate.

    When ``E`` is rank deficient (gates fed by fresh ``|0>`` qubits) the
    optimum is not unique; on the null space the unitary closest to
    ``current`` is taken, so sweeps do not jump between equivalent gates.
    """
    x, s, yh = np.linalg.svd(e)
    r = int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0
    y = yh.conj().T
    w = y[:, :r] @ x[:, :r].conj().T
    if r < e.shape[0]:
        xn, yn = x[:, r:], y[:, r:]
        q = polar_unitary(xn.conj().T @ current.conj().T @ yn)
        w = w + yn @ q @ xn.conj().T
    return w


class SweepAccelerator:
    """Safeguarded Anderson extrapolation of the sweep map.

    One full sweep is a fixed-point map ``G`` on the gate array.  From the
    last ``depth`` pairs ``(x_k, G(x_k))`` it proposes
    ``x_k + f_k - (dX + dF) gamma`` with ``gamma`` the least-squares fit of
    ``f_k`` on the residual differences, and projects every gate back to the
    nearest unitary.  The caller keeps the proposal only if it improves the
    objective, so monotonicity is untouched; a rejection clears the history.
    """

    def __init__(self, depth: int):
        self.depth = depth
        self._x: list[np.ndarray] = []
        self._f: list[np.ndarray] = []

    def reset(self) -> None:
        self._x, self._f = [], []

    def propose(self, before: np.ndarray, after: np.ndarray) -> np.ndarray | None:
        x = before.reshape(-1)
        self._x.append(x.copy())
        self._f.append(after.reshape(-1) - x)
        self._x = self._x[-(self.depth + 1) :]
        self._f = self._f[-(self.depth + 1) :]
        if len(self._f) < 3:
            return None
        df = np.diff(np.array(self._f), axis=0).T
        dx = np.diff(np.array(self._x), axis=0).T
        gamma = np.linalg.lstsq(df, self._f[-1], rcond=None)[0]
        guess = (self._x[-1] + self._f[-1] - (dx + df) @ gamma).reshape(before.shape)
        flat = guess.reshape(-1, 4, 4)
        for k in range(flat.shape[0]):
            flat[k] = polar_unitary(flat[k].conj().T)
        return guess


def maximize_overlap(
    target: MpsState,
    init: SequentialCircuit,
    cfg: SweepConfig | None = None,
) -> tuple[SequentialCircuit, SweepReport]:
    """Maximize ``|<target|circuit>|^2`` by sweeping polar updates.

    Each sweep visits layers ``1..M`` and, within a layer, bonds ``1..N-1``.
    After sweep ``k`` the infidelity ``eps_k = 1 - |<target|circuit>|^2`` and
    its relative change ``|eps_k - eps_{k-1}| / |eps_{k-1}|`` (infinite on the
    first sweep) are compared against ``cfg``.
    """
    cfg = cfg or SweepConfig()
    tgt = canonicalize(target, target.center if target.center is not None else 0)
    cache = EnvironmentCache(tgt, init)
    m, n = cache.order, cache.n_sites
    trace: list[float] = []
    eps_prev = math.inf
    eps = math.inf
    delta = math.inf
    iters = 0
    ov = 0.0
    converged_by = "max_iters"
    accel = SweepAccelerator(cfg.anderson) if cfg.anderson else None
    while iters < cfg.max_iters:
        iters += 1
        before = cache.gates.copy()
        for i in range(1, m + 1):
            for j in range(1, n):
                e = cache.environment(i, j)
                u = polar_update(e.matrix, cache.gates[i - 1, j - 1])
                cache.update_gate(i, j, u)
                ov = e.overlap_with(u)
        if accel is not None:
            guess = accel.propose(before, cache.gates)
            if guess is not None:
                ov_guess = overlap(tgt, circuit_to_mps(SequentialCircuit(n, guess)))
                if abs(ov_guess) > abs(ov):
                    cache.set_gates(guess)
                    ov = ov_guess
                else:
                    accel.reset()
        fid = abs(ov) ** 2
        trace.append(fid)
        eps = 1.0 - fid
        delta = math.inf if math.isinf(eps_prev) else abs(eps - eps_prev) / max(abs(eps_prev), 1e-300)
        eps_prev = eps
        if eps <= cfg.abs_tol:
            converged_by = "abs"
            break
        if delta <= cfg.rel_tol:
            converged_by = "rel"
            break
    report = SweepReport(
        final_fidelity=trace[-1], iterations=iters, fidelity_trace=trace, converged_by=converged_by, overlap=ov
    )
    return cache.circuit(), report


# ---------------------------------------------------------------- energy


def _mpo_conjugate_layer(mpo: list[np.ndarray], layer_gates: np.ndarray, cutoff: float) -> list[np.ndarray]:
    """``L^dagger W L`` for a staircase layer ``L`` and MPO tensors ``(wl, out, in, wr)``."""
    n = len(mpo)
    ts = [w.reshape(w.shape[0], 4, w.shape[3]) for w in mpo]
    # left-orthogonalize so that the right-to-left SVD sweep truncates safely
    for k in range(n - 1):
        l, d, r = ts[k].shape
        q, rr = np.linalg.qr(ts[k].reshape(l * d, r))
        ts[k] = q.reshape(l, d, q.shape[1])
        ts[k + 1] = np.tensordot(rr, ts[k + 1], axes=(1, 0))
    # innermost gate is the last one applied, U_{N-1}
    for j in range(n - 2, -1, -1):
        u = layer_gates[j]
        theta = np.tensordot(ts[j], ts[j + 1], axes=(2, 0))  # wl (o1 i1) (o2 i2) wr
        wl, wr = theta.shape[0], theta.shape[3]
        theta = theta.reshape(wl, 2, 2, 2, 2, wr)  # wl o1 i1 o2 i2 wr
        ug = _g4(u)  # [x1, x2, y1, y2] with rows = outputs
        # new[o1', i1', o2', i2'] = sum conj(U[x, o']) theta[x, y] U[y, i']
        t = np.tensordot(ug.conj(), theta, axes=([0, 1], [1, 3]))  # o1' o2' wl i1 i2 wr
        t = np.tensordot(t, ug, axes=([3, 4], [0, 1]))  # o1' o2' wl wr i1' i2'
        t = t.transpose(2, 0, 4, 1, 5, 3)  # wl o1' i1' o2' i2' wr
        res = svd(t.reshape(wl, 4, 4, wr), 2, cutoff=cutoff, relative=True)
        s = res.singular_values
        ts[j] = res.left * s[None, None, :]
        ts[j + 1] = res.right
    return [t.reshape(t.shape[0], 2, 2, t.shape[2]) for t in ts]


def _energy_left_step(env, a, gate, w):
    # env[a, c, w, d, e]; a[a, p, a']; gate[o, c', c, p]; w[w, o', o, w']
    g = _g4(gate)
    t = np.tensordot(env, a, axes=(0, 0))  # c w d e p a'
    t = np.tensordot(t, g, axes=([0, 4], [2, 3]))  # w d e a' o c'
    t = np.tensordot(t, w, axes=([0, 4], [0, 2]))  # d e a' c' o' w'
    t = np.tensordot(t, g.conj(), axes=([0, 4], [2, 0]))  # e a' c' w' d' q
    t = np.tensordot(t, a.conj(), axes=([0, 5], [0, 1]))  # a' c' w' d' e'
    return t


def _energy_right_step(env, a, gate, w):
    # env[a', c', w', d', e'] -> [a, c, w, d, e]
    g = _g4(gate)
    t = np.tensordot(a, env, axes=(2, 0))  # a p c' w' d' e'
    t = np.tensordot(t, a.conj(), axes=(5, 2))  # a p c' w' d' e q
    t = np.tensordot(t, g, axes=([1, 2], [3, 1]))  # a w' d' e q o c
    t = np.tensordot(t, w, axes=([1, 5], [3, 2]))  # a d' e q c w o'
    t = np.tensordot(t, g.conj(), axes=([1, 3, 6], [1, 3, 0]))  # a e c w d
    return t.transpose(0, 2, 3, 4, 1)


class EnergyEnvironmentCache:
    """Cached contractions of ``<Psi|H|Psi>`` with one gate (and its conjugate) removed."""

    def __init__(self, p: IsingParams, circuit, cutoff: float = 1e-14):
        self.params = p
        self.gates = _as_gates(circuit)
        self.order, nb = self.gates.shape[:2]
        self.n_sites = nb + 1
        if p.n_sites != self.n_sites:
            raise ValueError("Hamiltonian and circuit sizes differ")
        self.cutoff = cutoff
        self._mpo_top = ising_mpo(p)
        self._reset()

    def _reset(self):
        m, n = self.order, self.n_sites
        self._psi: list = [None] * m
        self._mpo: list = [None] * m
        self._psi[0] = zero_mps(n)
        self._mpo[m - 1] = self._mpo_top
        self._psi_valid = 0
        self._mpo_valid = m - 1
        self._left = [[None] * n for _ in range(m)]
        self._right = [[None] * n for _ in range(m)]
        self._left_valid = [-1] * m
        self._right_valid = [n] * m
        self._checksum = _gates_checksum(self.gates)

    def psi(self, i):
        while self._psi_valid < i:
            k = self._psi_valid
            self._psi[k + 1] = apply_layer(self._psi[k], self.gates[k])
            self._psi_valid = k + 1
        return self._psi[i]

    def mpo(self, i):
        while self._mpo_valid > i:
            k = self._mpo_valid
            self._mpo[k - 1] = _mpo_conjugate_layer(self._mpo[k], self.gates[k], self.cutoff)
            self._mpo_valid = k - 1
        return self._mpo[i]

    def _left_env(self, i, j):
        a = self.psi(i).tensors
        w = self.mpo(i)
        if self._left_valid[i] < 0:
            a0 = a[0][0]  # (c, a)
            env = np.einsum("ca,de->acde", a0, a0.conj())[:, :, None, :, :]
            self._left[i][0] = env
            self._left_valid[i] = 0
        while self._left_valid[i] < j:
            k = self._left_valid[i]
            self._left[i][k + 1] = _energy_left_step(self._left[i][k], a[k + 1], self.gates[i, k], w[k])
            self._left_valid[i] = k + 1
        return self._left[i][j]

    def _right_env(self, i, j):
        n = self.n_sites
        a = self.psi(i).tensors
        w = self.mpo(i)
        if self._right_valid[i] > n - 1:
            wl = w[n - 1][:, :, :, 0]  # w, d(out), c(in)
            self._right[i][n - 1] = wl.transpose(2, 0, 1)[None, :, :, :, None]
            self._right_valid[i] = n - 1
        while self._right_valid[i] > j:
            k = self._right_valid[i]
            self._right[i][k - 1] = _energy_right_step(self._right[i][k], a[k], self.gates[i, k - 1], w[k - 1])
            self._right_valid[i] = k - 1
        return self._right[i][j]

    def quadratic_form(self, layer: int, bond: int) -> np.ndarray:
        """16x16 Hermitian ``Q`` with ``energy = vec(U)^dagger Q vec(U)``, ``vec`` row-major."""
        if _gates_checksum(self.gates) != self._checksum:
            self._reset()
        i, j = layer - 1, bond - 1
        left = self._left_env(i, j)
        right = self._right_env(i, j + 1)
        a = self.psi(i).tensors[j + 1]
        w = self.mpo(i)[j]
        t = np.tensordot(left, a, axes=(0, 0))  # c w d e p a'
        t = np.tensordot(t, a.conj(), axes=(3, 0))  # c w d p a' q e'
        t = np.tensordot(t, w, axes=(1, 0))  # c d p a' q e' o' o w'
        t = np.tensordot(t, right, axes=([3, 5, 8], [0, 4, 2]))  # c d p q o' o c' d'
        # energy = sum t[c,d,p,q,o',o,c',d'] U[o,c',c,p] conj(U[o',d',d,q])
        q = t.transpose(4, 7, 1, 3, 5, 6, 0, 2).reshape(16, 16)
        return 0.5 * (q + q.conj().T)

    def update_gate(self, layer, bond, u):
        i, j = layer - 1, bond - 1
        self.gates[i, j] = u
        self._psi_valid = min(self._psi_valid, i)
        self._mpo_valid = max(self._mpo_valid, i)
        for k in range(self.order):
            if k == i:
                self._left_valid[k] = min(self._left_valid[k], j)
                self._right_valid[k] = max(self._right_valid[k], j + 1)
            else:
                self._left_valid[k] = -1
                self._right_valid[k] = self.n_sites
        self._checksum = _gates_checksum(self.gates)

    def set_gates(self, gates) -> None:
        self.gates = _as_gates(gates)
        self._reset()

    def energy(self) -> float:
        q = self.quadratic_form(self.order, self.n_sites - 1)
        u = self.gates[-1, -1].reshape(-1)
        return float(np.real(np.vdot(u, q @ u)))

    def circuit(self) -> SequentialCircuit:
        return SequentialCircuit(self.n_sites, self.gates.copy())


def _drop_unitary_constants(q: np.ndarray) -> tuple[np.ndarray, float]:
    """Split ``Q = R + (Y (x) 1 + 1 (x) X)`` where the second part is constant on unitaries.

    ``vec(U)^dagger (1 (x) X) vec(U) = Tr X`` and likewise for ``Y``, so only
    ``R`` shapes the landscape.  Returns ``R`` and the constant.
    """
    q4 = q.reshape(4, 4, 4, 4)  # [r', s', r, s]
    x = np.einsum("abac->bc", q4) / 4.0  # acts on the input index
    y = np.einsum("abcb->ac", q4) / 4.0  # acts on the output index
    tr = np.trace(q) / 16.0
    eye = np.eye(4)
    const_part = np.kron(eye, x) + np.kron(y, eye) - tr * np.eye(16)
    const = float(np.real(np.trace(x) + np.trace(y) - 4.0 * tr))
    return q - const_part, const


def minimize_local_energy(q: np.ndarray, u0: np.ndarray, max_inner: int = 50, tol: float = 1e-15):
    """Minimize ``vec(U)^dagger Q vec(U)`` over unitaries, starting from ``u0``.

    Parts of ``Q`` that are constant on unitaries are removed and the rest is
    shifted by its largest eigenvalue, which makes the form concave; minimizing
    its linearization with ``U <- -Y X^dagger`` then never raises the energy.
    Returns the new gate and its energy.
    """
    r, const = _drop_unitary_constants(q)
    lam = np.linalg.eigvalsh(r)[-1]
    qs = r - lam * np.eye(16)
    const += 4.0 * lam
    u = u0
    f = float(np.real(np.vdot(u.reshape(-1), qs @ u.reshape(-1))))
    for _ in range(max_inner):
        w = (qs @ u.reshape(-1)).reshape(4, 4)
        u_new = -polar_unitary(w.conj().T)
        f_new = float(np.real(np.vdot(u_new.reshape(-1), qs @ u_new.reshape(-1))))
        if f_new > f:
            break
        u, f_old, f = u_new, f, f_new
        if f_old - f <= tol * max(1.0, abs(f)):
            break
    return u, f + const


def minimize_energy(
    p: IsingParams,
    init: SequentialCircuit,
    cfg: SweepConfig | None = None,
    max_inner: int = 50,
) -> tuple[SequentialCircuit, list[float]]:
    """Minimize ``<Psi|H|Psi>`` over the circuit by sweeping local polar updates.

    Stops when the energy change over a sweep is below ``cfg.abs_tol`` or
    ``cfg.rel_tol * |E|``, or after ``cfg.max_iters`` sweeps.
    """
    cfg = cfg or SweepConfig(max_iters=20_000, abs_tol=1e-12, rel_tol=1e-15)
    cache = EnergyEnvironmentCache(p, init)
    m, n = cache.order, cache.n_sites
    trace: list[float] = []
    e_prev = math.inf
    accel = SweepAccelerator(cfg.anderson) if cfg.anderson else None
    for _ in range(cfg.max_iters):
        e = e_prev
        before = cache.gates.copy()
        for i in range(1, m + 1):
            for j in range(1, n):
                q = cache.quadratic_form(i, j)
                u, e = minimize_local_energy(q, cache.gates[i - 1, j - 1], max_inner=max_inner)
                cache.update_gate(i, j, u)
        if accel is not None:
            guess = accel.propose(before, cache.gates)
            if guess is not None:
                e_guess = mps_energy(circuit_to_mps(SequentialCircuit(n, guess)), p)
                if e_guess < e:
                    cache.set_gates(guess)
                    e = e_guess
                else:
                    accel.reset()
        trace.append(float(e))
        if abs(e_prev - e) <= cfg.abs_tol or abs(e_prev - e) <= cfg.rel_tol * abs(e):
            break
        e_prev = e
    return cache.circuit(), trace
