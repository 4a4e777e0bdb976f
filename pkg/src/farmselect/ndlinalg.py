"""Dense linear algebra kernels: validated matrices, symmetric eigen, SPD solves.

Matrices are plain ``numpy.ndarray`` objects in C (row-major) order with
float64 entries; :func:`as_matrix` is the validating constructor used at the
package boundary. The eigensolver does a full symmetric decomposition
(LAPACK: Householder tridiagonalization followed by implicit QR/QL style
iteration) and truncates to the requested leading pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadDimensionError,
    NoConvergenceError,
    NonSymmetricError,
    NotPositiveDefiniteError,
)

__all__ = ["EigenPairs", "as_matrix", "as_vector", "sym_eigen_topk", "solve_spd"]


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate user input as a finite, 2-D, row-major float64 matrix."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise BadDimensionError(f"{name} must be 2-D, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise BadDimensionError(f"{name} contains NaN or Inf entries")
    return m


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Validate user input as a finite 1-D float64 vector."""
    v = np.ascontiguousarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise BadDimensionError(f"{name} must be 1-D, got ndim={v.ndim}")
    if not np.isfinite(v).all():
        raise BadDimensionError(f"{name} contains NaN or Inf entries")
    return v


@dataclass(frozen=True)
class EigenPairs:
    """Leading eigenvalues (non-increasing) and unit eigenvector columns.

    Column ``j`` of ``vectors`` belongs to ``values[j]``. Each column is
    normalized so its entry of largest magnitude is non-negative (ties broken
    by the lowest index), which pins down the sign that an eigendecomposition
    leaves free.
    """

    values: np.ndarray
    vectors: np.ndarray


def _apply_sign_convention(vectors: np.ndarray) -> np.ndarray:
    v = vectors.copy()
    for j in range(v.shape[1]):
        lead = int(np.argmax(np.abs(v[:, j])))
        if v[lead, j] < 0.0:
            v[:, j] = -v[:, j]
    return v


def sym_eigen_topk(S, k: int) -> EigenPairs:
    """Top-k eigenpairs of a symmetric matrix, values sorted non-increasing.

    ``S`` must be symmetric within a 1e-10 relative tolerance; it is
    symmetrized as ``(S + S^T)/2`` before decomposition so floating-point
    Gram matrices are accepted. Raises ``NonSymmetricError``,
    ``BadDimensionError`` or ``NoConvergenceError``.
    """
    S = as_matrix(S, "S")
    m = S.shape[0]
    if S.shape[1] != m:
        raise BadDimensionError(f"S must be square, got {S.shape}")
    if not (1 <= k <= m):
        raise BadDimensionError(f"k={k} out of range [1, {m}]")
    scale = max(np.abs(S).max(), 1.0)
    asym = np.abs(S - S.T).max()
    if asym > 1e-10 * scale:
        raise NonSymmetricError(
            f"max |S - S^T| = {asym:.3e} exceeds 1e-10 relative tolerance"
        )
    Ssym = 0.5 * (S + S.T)
    try:
        vals, vecs = np.linalg.eigh(Ssym)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order][:k].copy()
    vecs = _apply_sign_convention(np.ascontiguousarray(vecs[:, order[:k]]))
    return EigenPairs(values=vals, vectors=vecs)


def solve_spd(A, B) -> np.ndarray:
    """Solve ``A X = B`` for symmetric positive-definite ``A`` by Cholesky.

    A pivot at or below ``1e-12 * trace(A)/dim`` raises
    ``NotPositiveDefiniteError``.
    """
    A = as_matrix(A, "A")
    B = np.asarray(B, dtype=np.float64)
    squeeze = B.ndim == 1
    if squeeze:
        B = B[:, None]
    B = as_matrix(B, "B")
    m = A.shape[0]
    if A.shape[1] != m:
        raise BadDimensionError(f"A must be square, got {A.shape}")
    if B.shape[0] != m:
        raise BadDimensionError(f"B has {B.shape[0]} rows, expected {m}")

    pivot_floor = 1e-12 * np.trace(A) / m if m else 0.0
    L = np.zeros_like(A)
    for j in range(m):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if d <= pivot_floor:
            raise NotPositiveDefiniteError(
                f"Cholesky pivot {d:.3e} at column {j} is below {pivot_floor:.3e}"
            )
        L[j, j] = np.sqrt(d)
        if j + 1 < m:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]

    # forward then backward substitution, all right-hand sides at once
    Y = np.zeros_like(B)
    for i in range(m):
        Y[i] = (B[i] - L[i, :i] @ Y[:i]) / L[i, i]
    X = np.zeros_like(B)
    for i in range(m - 1, -1, -1):
        X[i] = (Y[i] - L[i + 1 :, i] @ X[i + 1 :]) / L[i, i]
    return X[:, 0] if squeeze else X
