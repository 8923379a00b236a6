"""Dense complex linear-algebra kernels.

All tensors are plain ``numpy.ndarray`` objects of dtype ``complex128`` in
row-major (C) layout.  Two-site gates are stored as 4x4 matrices whose row
index is ``(out_1, out_2)`` and column index ``(in_1, in_2)``, with the left
qubit as the most significant bit.  Statevectors follow the same big-endian
convention: site 1 is the most significant bit of the amplitude index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from cqc.errors import DimensionError, NumericalError

DEFAULT_CUTOFF = 1e-14


@dataclass(frozen=True)
class SvdResult:
    """Result of :func:`svd`.

    ``left`` has shape ``(*row_extents, rank)`` and ``right`` has shape
    ``(rank, *col_extents)`` so that ``left @ diag(s) @ right`` reproduces the
    (truncated) input.  ``right`` is therefore ``Y^dagger`` in ``X S Y^dagger``.
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray
    discarded_weight: float = 0.0

    @property
    def rank(self) -> int:
        return int(self.singular_values.size)


def contract(a: np.ndarray, b: np.ndarray, paired_axes: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum over paired axes of ``a`` and ``b``.

    The free axes of ``a`` come first, then those of ``b``, each in their
    original order.

    Raises:
        DimensionError: if a pair of axes has different extents.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a = [p[0] for p in paired_axes]
    axes_b = [p[1] for p in paired_axes]
    for ia, ib in zip(axes_a, axes_b):
        if not (-a.ndim <= ia < a.ndim and -b.ndim <= ib < b.ndim):
            raise DimensionError(f"axis pair ({ia}, {ib}) out of range for ranks {a.ndim}, {b.ndim}")
        if a.shape[ia] != b.shape[ib]:
            raise DimensionError(
                f"cannot pair axis {ia} (extent {a.shape[ia]}) with axis {ib} (extent {b.shape[ib]})"
            )
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def _robust_svd(m: np.ndarray):
    try:
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd", check_finite=False)


def svd(
    t: np.ndarray,
    split: int | Sequence[int] = 1,
    max_rank: int | None = None,
    cutoff: float = DEFAULT_CUTOFF,
    relative: bool = False,
) -> SvdResult:
    """Truncated singular value decomposition of a tensor.

    Args:
        t: input tensor.
        split: either the number of leading axes forming the row group, or an
            explicit list of row axes (the remaining axes, in order, form the
            column group).
        max_rank: keep at most this many singular values.
        cutoff: discard singular values ``<= cutoff`` (times the largest one
            when ``relative`` is set).
        relative: interpret ``cutoff`` relative to the largest singular value.

    Returns:
        SvdResult with row/column axes restored on the isometries.
        ``discarded_weight`` is the sum of the squares of discarded values.
    """
    t = np.asarray(t)
    if isinstance(split, (int, np.integer)):
        row_axes = list(range(int(split)))
    else:
        row_axes = [ax % t.ndim for ax in split]
    col_axes = [ax for ax in range(t.ndim) if ax not in row_axes]
    if not row_axes or not col_axes:
        raise DimensionError("svd needs non-empty row and column axis groups")
    perm = row_axes + col_axes
    tp = np.transpose(t, perm) if perm != list(range(t.ndim)) else t
    row_ext = [t.shape[ax] for ax in row_axes]
    col_ext = [t.shape[ax] for ax in col_axes]
    m = tp.reshape(int(np.prod(row_ext)), int(np.prod(col_ext)))
    u, s, vh = _robust_svd(m)

    threshold = cutoff * s[0] if (relative and s.size) else cutoff
    keep = int(np.count_nonzero(s > threshold))
    if max_rank is not None:
        keep = min(keep, max_rank)
    keep = max(keep, 1)
    discarded = float(np.sum(s[keep:] ** 2))
    u = u[:, :keep]
    vh = vh[:keep, :]
    s = s[:keep]
    return SvdResult(
        left=u.reshape(*row_ext, keep),
        singular_values=s,
        right=vh.reshape(keep, *col_ext),
        discarded_weight=discarded,
    )


def polar_unitary(e: np.ndarray) -> np.ndarray:
    """Unitary ``W`` maximizing ``Re Tr[e W]``.

    With ``e = X S Y^dagger`` this is ``Y X^dagger``.
    """
    e = np.asarray(e, dtype=complex)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise DimensionError(f"polar_unitary needs a square matrix, got shape {e.shape}")
    x, _, yh = _robust_svd(e)
    return yh.conj().T @ x.conj().T


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``n x n`` unitary (QR of a Ginibre matrix, phase-fixed)."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _orthonormal_prefix(t: np.ndarray, atol: float) -> int:
    k = 0
    for j in range(1, t.shape[1] + 1):
        block = t[:, :j]
        if np.max(np.abs(block.conj().T @ block - np.eye(j))) <= atol:
            k = j
        else:
            break
    return k


def qr_complete(
    t: np.ndarray,
    n_fixed: int | None = None,
    rng: np.random.Generator | int | None = None,
    max_retries: int = 8,
) -> np.ndarray:
    """Complete the leading orthonormal columns of ``t`` to a unitary.

    The remaining columns are replaced by random vectors and the whole matrix
    is orthonormalized with a QR decomposition whose ``R`` diagonal is made
    real-positive, which leaves the leading orthonormal block untouched.

    Args:
        t: square matrix.
        n_fixed: number of leading orthonormal columns to keep. Detected
            automatically (tolerance 1e-10) when omitted.
        rng: generator or seed for the random fill.
        max_retries: attempts before giving up on a rank-deficient fill.
    """
    t = np.asarray(t, dtype=complex)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionError(f"qr_complete needs a square matrix, got shape {t.shape}")
    n = t.shape[0]
    k = _orthonormal_prefix(t, 1e-10) if n_fixed is None else int(n_fixed)
    if k == n:
        return t.copy()
    rng = np.random.default_rng(rng)
    for _ in range(max_retries):
        fill = rng.standard_normal((n, n - k)) + 1j * rng.standard_normal((n, n - k))
        full = np.concatenate([t[:, :k], fill], axis=1)
        q, r = np.linalg.qr(full)
        d = np.diagonal(r)
        if np.min(np.abs(d)) < 1e-10:
            continue
        q = q * (d / np.abs(d))
        return q
    raise NumericalError("random completion stayed rank deficient")


def is_unitary(u: np.ndarray, atol: float = 1e-12) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))) <= atol)


def check_finite(t: np.ndarray, what: str = "tensor") -> np.ndarray:
    if not np.all(np.isfinite(t)):
        raise NumericalError(f"{what} contains NaN or Inf")
    return t
