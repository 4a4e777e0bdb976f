"""Approximate factor model estimation by PCA on the n x n Gram matrix.

The estimated factor matrix is sqrt(n) times the leading eigenvectors of
``X X^T``, loadings are ``X^T F / n``, and the idiosyncratic part is the
reconstruction residual, so ``X = F B^T + U`` holds exactly by construction
and ``F^T F / n = I``. Working through the n x n Gram follows the usual
convention for n < p and keeps the eigenproblem small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDimensionError, DegenerateInputError, RankDeficientError
from .ndlinalg import as_matrix, solve_spd, sym_eigen_topk

__all__ = [
    "FactorDecomposition",
    "default_k_max",
    "estimate_factors",
    "select_num_factors",
    "annihilator_apply",
]


@dataclass(frozen=True)
class FactorDecomposition:
    """PCA estimate of loadings, factors and idiosyncratic residuals.

    ``loadings`` is (p-1) x K, ``factors`` is n x K with F^T F / n = I_K,
    ``idiosyncratic`` is n x (p-1) and reconstructs the (possibly centered)
    input exactly as ``factors @ loadings.T + idiosyncratic``.
    ``eigenvalues`` keeps the leading spectrum of X X^T for reporting.
    ``column_means`` records what was subtracted (zeros when not centered).
    """

    loadings: np.ndarray
    factors: np.ndarray
    idiosyncratic: np.ndarray
    num_factors: int
    eigenvalues: np.ndarray
    column_means: np.ndarray


def default_k_max(n: int, p_minus_1: int) -> int:
    """Default upper bound for the eigenvalue-ratio search: floor(min(n, p-1, 20)/2),
    clipped to the legal range."""
    k = min(n, p_minus_1, 20) // 2
    return max(1, min(k, min(n, p_minus_1) - 1))


def estimate_factors(X, K: int, center: bool = True) -> FactorDecomposition:
    """Fit the K-factor PCA decomposition of an n x (p-1) design.

    K = 0 is legal and returns the (centered) design unchanged as the
    idiosyncratic part, which downstream turns the pipeline into plain
    penalized regression.
    """
    X = as_matrix(X, "X")
    n, p1 = X.shape
    if n < 2 or p1 < 1:
        raise BadDimensionError(f"need n >= 2 and p-1 >= 1, got {X.shape}")
    if not (0 <= K <= min(n, p1) - 1):
        raise BadDimensionError(
            f"K={K} out of range [0, {min(n, p1) - 1}] for shape {X.shape}"
        )
    if center:
        mu = X.mean(axis=0)
        Xc = X - mu
    else:
        mu = np.zeros(p1)
        Xc = X.copy()
    if K > 0 and np.all(np.ptp(X, axis=0) == 0.0):
        raise DegenerateInputError("X has zero variance in every column")

    n_eigs = min(n, p1)
    gram = Xc @ Xc.T
    pairs = sym_eigen_topk(gram, n_eigs)
    eigenvalues = pairs.values

    if K == 0:
        factors = np.zeros((n, 0))
        loadings = np.zeros((p1, 0))
        idio = Xc
    else:
        factors = np.sqrt(n) * pairs.vectors[:, :K]
        loadings = Xc.T @ factors / n
        idio = Xc - factors @ loadings.T
    return FactorDecomposition(
        loadings=loadings,
        factors=factors,
        idiosyncratic=idio,
        num_factors=int(K),
        eigenvalues=eigenvalues,
        column_means=mu,
    )


def select_num_factors(X, k_max: int | None = None) -> int:
    """Eigenvalue-ratio choice of the number of factors.

    Maximizes lambda_k / lambda_{k+1} of X X^T over 1 <= k <= k_max, ties
    broken by the smallest k. Trailing eigenvalues below 1e-12 * lambda_1 are
    floored there before forming ratios. Operates on X as given; center
    beforehand if desired.
    """
    X = as_matrix(X, "X")
    n, p1 = X.shape
    if k_max is None:
        k_max = default_k_max(n, p1)
    if not (1 <= k_max <= min(n, p1) - 1):
        raise BadDimensionError(
            f"k_max={k_max} out of range [1, {min(n, p1) - 1}] for shape {X.shape}"
        )
    pairs = sym_eigen_topk(X @ X.T, k_max + 1)
    vals = pairs.values.copy()
    floor = 1e-12 * max(vals[0], 0.0)
    if floor <= 0.0:
        raise DegenerateInputError("X X^T has an all-zero spectrum")
    vals = np.maximum(vals, floor)
    ratios = vals[:-1] / vals[1:]
    return int(np.argmax(ratios)) + 1


def annihilator_apply(factors, M) -> np.ndarray:
    """Apply I - F (F^T F)^{-1} F^T to M without forming the n x n projector."""
    M = as_matrix(M, "M")
    factors = as_matrix(factors, "factors")
    if factors.shape[1] == 0:
        return M.copy()
    if factors.shape[0] != M.shape[0]:
        raise BadDimensionError(
            f"factors have {factors.shape[0]} rows, M has {M.shape[0]}"
        )
    gram = factors.T @ factors
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > 1e10:
        raise RankDeficientError(
            f"factor Gram condition {eigs[-1] / max(eigs[0], 1e-300):.3e} exceeds 1e10"
        )
    return M - factors @ solve_spd(gram, factors.T @ M)
