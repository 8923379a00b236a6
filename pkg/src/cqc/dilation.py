"""Unitary dilation of non-unitary operators with one ancilla and post-selection.

For ``A = U S V^dagger`` and ``s = 1 / s_max`` the columns ``[s A; C]`` with
``C = U sqrt(1 - s^2 S^2) V^dagger`` are orthonormal, and completing them to a
unitary gives ``V_A`` with ``s A`` as its top-left block.  Preparing the
ancilla (the most significant qubit) in ``|0>``, applying ``V_A`` and keeping
the ancilla-``|0>`` outcome applies ``A`` up to normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cqc.errors import DimensionError, PostSelectionError
from cqc.tensor_core import check_finite, qr_complete

_CLAMP = 1e-12


@dataclass(frozen=True, eq=False)
class DilatedGate:
    """``unitary`` embeds ``scale * operator`` as its top-left block."""

    unitary: np.ndarray
    scale: float
    operator: np.ndarray
    seed: int | None = None

    @property
    def n_qubits(self) -> int:
        """Qubits acted on by ``operator`` (the ancilla excluded)."""
        return int(round(np.log2(self.operator.shape[0])))

    def block(self) -> np.ndarray:
        d = self.operator.shape[0]
        return self.unitary[:d, :d]

    def success_prob(self, psi: np.ndarray) -> float:
        """Probability ``s^2 |A psi|^2`` of the accepted ancilla outcome."""
        return float(self.scale**2 * np.linalg.norm(self.operator @ psi) ** 2)


def dilate(a: np.ndarray, seed: int | None = 0) -> DilatedGate:
    """Dilate a square, nonzero ``a`` (dimension a power of two).

    Args:
        a: Operator to embed.
        seed: Seed of the random completion; equal seeds give identical gates.

    Raises:
        DimensionError: ``a`` is not square with power-of-two size.
        ValueError: ``a`` is zero.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] & (a.shape[0] - 1):
        raise DimensionError(f"need a square operator of power-of-two size, got {a.shape}")
    check_finite(a, "operator")
    u, sig, vh = np.linalg.svd(a)
    if sig[0] == 0.0:
        raise ValueError("cannot dilate the zero operator")
    s = 1.0 / sig[0]
    rest = 1.0 - (s * sig) ** 2
    rest[sig >= sig[0] * (1.0 - _CLAMP)] = 0.0
    c = (u * np.sqrt(np.clip(rest, 0.0, None))) @ vh
    d = a.shape[0]
    cols = np.zeros((2 * d, 2 * d), dtype=complex)
    cols[:d, :d] = s * a
    cols[d:, :d] = c
    v = qr_complete(cols, n_fixed=d, rng=seed)
    return DilatedGate(unitary=v, scale=float(s), operator=a, seed=seed)


def apply_postselected(g: DilatedGate, psi: np.ndarray) -> tuple[np.ndarray, float]:
    """Run the dilated gate on ``|0>_anc (x) psi`` and keep the ancilla-``|0>`` branch.

    Returns:
        The normalized post-selected state and the success probability.

    Raises:
        PostSelectionError: the accepted branch has zero weight.
    """
    psi = np.asarray(psi, dtype=complex)
    d = g.operator.shape[0]
    if psi.shape != (d,):
        raise DimensionError(f"state of shape {psi.shape} does not fit a {d}-dimensional operator")
    full = g.unitary[:, :d] @ psi
    kept = full[:d]
    prob = float(np.vdot(kept, kept).real)
    if prob <= 1e-300:
        raise PostSelectionError("post-selection outcome has zero probability")
    return kept / np.sqrt(prob), prob


def apply_postselected_chain(gates, psi: np.ndarray) -> tuple[np.ndarray, float]:
    """Apply several dilated gates in turn; the success probabilities multiply."""
    total = 1.0
    for g in gates:
        psi, p = apply_postselected(g, psi)
        total *= p
    return psi, total
