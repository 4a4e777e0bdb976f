"""End-to-end factor-adjusted model selection and its diagnostics.

The two-step estimator: (1) fit the approximate factor model by PCA,
obtaining factors F, loadings B and idiosyncratic residuals U; (2) run
partially-penalized L1 regression on the augmented design (1, U, F),
penalizing only the U block. The coefficients on U are the coefficients on
the original covariates; the factor coefficients are nuisance parameters.

For the linear family the same estimate is available through a projection
shortcut: regress (I - P) y on (I - P) (1, U) with P the projector onto the
factor column space; both formulations share their minimizer in beta.

Plain lasso is the K = 0 special case throughout, which is how the
benchmarking code runs the baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    BadDimensionError,
    DegenerateInputError,
    RankDeficientError,
)
from .factor import (
    FactorDecomposition,
    annihilator_apply,
    default_k_max,
    estimate_factors,
    select_num_factors,
)
from .glm import GlmFamily, LINEAR, get_family, gradient_residuals
from .ndlinalg import as_matrix, as_vector, solve_spd
from .solver import (
    CrossValidation,
    LambdaPath,
    PenalizedFit,
    cross_validate,
    fit_lambda_path,
    fit_penalized,
    lambda_path_grid,
    make_penalty_mask,
)

__all__ = [
    "FarmSelectResult",
    "SelectionDiagnostics",
    "TheoremOneAudit",
    "ScreeningResult",
    "farm_select",
    "farm_select_linear_profile",
    "farm_screen",
    "irrepresentable_stat",
    "gamma_inf",
    "theory_constants",
    "theorem1_audit",
]

LambdaSpec = Union[str, float, Sequence[float]]


@dataclass(frozen=True)
class FarmSelectResult:
    """Everything one run produces: factor fit, path, CV curve, chosen fit."""

    factor_fit: FactorDecomposition
    K_used: int
    lambda_chosen: float
    fit: PenalizedFit
    selected: np.ndarray
    path: LambdaPath
    cv_scores: Optional[np.ndarray]
    cv: Optional[CrossValidation]
    column_scales: np.ndarray

    @property
    def beta(self) -> np.ndarray:
        """Coefficients on the original covariates (original column scale)."""
        return self.fit.beta / self.column_scales

    @property
    def gamma(self) -> np.ndarray:
        return self.fit.gamma

    def predict(self, X_new) -> np.ndarray:
        """Linear predictor for new rows.

        New rows are scored in the fitted decomposition: factor scores come
        from regressing the (scaled, centered) row on the loadings,
        the idiosyncratic part is the remainder, and the fitted intercept,
        covariate and factor coefficients are applied to those pieces.
        """
        X_new = as_matrix(X_new, "X_new")
        scaled = X_new / self.column_scales
        centered = scaled - self.factor_fit.column_means
        B = self.factor_fit.loadings
        if self.K_used:
            f_new = solve_spd(B.T @ B, B.T @ centered.T).T
            u_new = centered - f_new @ B.T
        else:
            f_new = np.zeros((X_new.shape[0], 0))
            u_new = centered
        return self.fit.intercept + u_new @ self.fit.beta + f_new @ self.fit.gamma


@dataclass(frozen=True)
class SelectionDiagnostics:
    """Curvature / irrepresentability readouts of the loss at the truth.

    ``kappa_inf`` and ``kappa_2`` are 1 / ||(H_SS)^{-1}||_inf and
    1 / ||(H_SS)^{-1}||_2 for the Hessian H of the average loss at the true
    coefficients (so both equal 1 for an identity Hessian); ``gamma_inf`` is
    ||H_{S2,S} (H_SS)^{-1}||_inf and ``tau = 1 - gamma_inf``. ``epsilon`` is
    the max absolute score coordinate at the truth; ``score_support_inf``
    restricts the max to the support.
    """

    gamma_inf: float
    tau: float
    kappa_inf: float
    kappa_2: float
    epsilon: float
    score_support_inf: float
    w_max: float
    support_size: int
    theorem1_support_ok: Optional[bool] = None
    theorem1_linf_bound: Optional[float] = None
    observed_linf_error: Optional[float] = None


@dataclass(frozen=True)
class TheoremOneAudit:
    """Report card for the deterministic selection/estimation guarantee."""

    lam: float
    window_low: float
    window_high: float
    window_ok: bool
    support_ok: bool
    linf_bound: float
    observed_linf: float
    linf_ok: Optional[bool]
    sign_ok: bool
    sign_window_high: float
    diagnostics: SelectionDiagnostics


@dataclass(frozen=True)
class ScreeningResult:
    """Decorrelated marginal-regression screening scores and ranking."""

    ranking: np.ndarray     # covariate indices, best first (length top_m)
    scores: np.ndarray      # |coefficient on u_j|, full length p-1
    failed: np.ndarray      # True where the marginal fit was degenerate


def _prepare_design(X, y, standardize: bool):
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if y.shape[0] != X.shape[0]:
        raise BadDimensionError(
            f"y has length {y.shape[0]}, X has {X.shape[0]} rows"
        )
    if standardize:
        scales = X.std(axis=0)
        scales = np.where(scales > 0, scales, 1.0)
        X = X / scales
    else:
        scales = np.ones(X.shape[1])
    return X, y, scales


def _resolve_k(X, num_factors, center: bool, k_max: Optional[int]) -> int:
    n, p1 = X.shape
    if isinstance(num_factors, str):
        if num_factors != "auto":
            raise BadDimensionError(f"num_factors must be 'auto' or int, got {num_factors!r}")
        Xs = X - X.mean(axis=0) if center else X
        return select_num_factors(Xs, k_max if k_max is not None else default_k_max(n, p1))
    K = int(num_factors)
    if K < 0:
        raise BadDimensionError(f"num_factors must be >= 0, got {K}")
    return K


def _fit_with_selection(
    W, y, family, mask, lam: LambdaSpec, *,
    n_lambdas, lambda_min_ratio, n_folds, seed, cv_contiguous,
    tol, max_iter, k_factors, intercept_column=True, cv_refit=False,
):
    """Shared 'path + choose lambda' logic for both formulations."""
    do_cv = False
    if isinstance(lam, str):
        if lam != "cv":
            raise BadDimensionError(f"lambda must be 'cv', a number or a sequence, got {lam!r}")
        grid = lambda_path_grid(
            W, y, family, mask, n_lambdas=n_lambdas, ratio=lambda_min_ratio,
            intercept_column=intercept_column,
        )
        do_cv = True
    elif np.ndim(lam) == 0:
        grid = np.asarray([float(lam)])
    else:
        grid = np.asarray(lam, dtype=np.float64)
        do_cv = grid.size > 1

    path = fit_lambda_path(
        W, y, family, mask, grid, tol=tol, max_iter=max_iter,
        k_factors=k_factors, intercept_column=intercept_column,
    )
    cv = None
    if do_cv:
        cv = cross_validate(
            W, y, family, mask, grid, n_folds=n_folds, seed=seed,
            contiguous=cv_contiguous, tol=tol, max_iter=max_iter,
            k_factors=k_factors, intercept_column=intercept_column,
            refit=cv_refit,
        )
        chosen_idx = int(np.flatnonzero(grid == cv.best_lambda)[0])
    else:
        chosen_idx = 0
    return path, cv, chosen_idx


def farm_select(
    X,
    y,
    family: Union[str, GlmFamily] = "linear",
    num_factors: Union[str, int] = "auto",
    lam: LambdaSpec = "cv",
    *,
    center: bool = True,
    k_max: Optional[int] = None,
    n_lambdas: int = 100,
    lambda_min_ratio: float = 1e-3,
    n_folds: int = 10,
    seed: int = 0,
    cv_contiguous: bool = False,
    cv_refit: bool = False,
    standardize: bool = False,
    tol: float = 1e-7,
    max_iter: Optional[int] = None,
    decomposition: Optional[FactorDecomposition] = None,
) -> FarmSelectResult:
    """Two-step factor-adjusted penalized regression.

    Step 1 estimates the factor structure by PCA (number of factors by the
    eigenvalue-ratio rule when ``num_factors='auto'``). Step 2 solves the
    partially-penalized problem on the augmented design (1, U, F) along a
    decreasing lambda path, picking lambda by seeded K-fold cross-validation
    when ``lam='cv'``. ``num_factors=0`` reduces the whole pipeline to plain
    lasso on (1, X).

    ``decomposition`` overrides Step 1 with a pre-computed factor fit (used
    e.g. to verify rotation invariance); it must match ``X``'s row count.
    """
    family = get_family(family)
    X, y, scales = _prepare_design(X, y, standardize)
    n, p1 = X.shape

    if decomposition is None:
        K = _resolve_k(X, num_factors, center, k_max)
        if p1 <= K:
            raise DegenerateInputError(f"p-1={p1} must exceed K={K}")
        decomp = estimate_factors(X, K, center=center)
    else:
        decomp = decomposition
        K = decomp.num_factors
        if decomp.idiosyncratic.shape != (n, p1):
            raise BadDimensionError("decomposition does not match X")

    W = np.column_stack([np.ones(n), decomp.idiosyncratic, decomp.factors])
    mask = make_penalty_mask(1 + p1 + K, K)
    path, cv, chosen_idx = _fit_with_selection(
        W, y, family, mask, lam,
        n_lambdas=n_lambdas, lambda_min_ratio=lambda_min_ratio,
        n_folds=n_folds, seed=seed, cv_contiguous=cv_contiguous,
        tol=tol, max_iter=max_iter, k_factors=K, cv_refit=cv_refit,
    )
    fit = path.fits[chosen_idx]
    return FarmSelectResult(
        factor_fit=decomp,
        K_used=K,
        lambda_chosen=float(path.lambdas[chosen_idx]),
        fit=fit,
        selected=fit.active_set,
        path=path,
        cv_scores=cv.scores if cv is not None else None,
        cv=cv,
        column_scales=scales,
    )


def farm_select_linear_profile(
    X,
    y,
    num_factors: Union[str, int] = "auto",
    lam: LambdaSpec = "cv",
    *,
    center: bool = True,
    k_max: Optional[int] = None,
    n_lambdas: int = 100,
    lambda_min_ratio: float = 1e-3,
    n_folds: int = 10,
    seed: int = 0,
    cv_contiguous: bool = False,
    cv_refit: bool = False,
    standardize: bool = False,
    tol: float = 1e-7,
    max_iter: Optional[int] = None,
    decomposition: Optional[FactorDecomposition] = None,
) -> FarmSelectResult:
    """Projection form of the linear-family pipeline.

    Solves ``min_beta (1/2n) ||(I - P)(y - U1 beta)||^2 + lam ||beta_pen||_1``
    with ``U1 = (1, U)`` and ``P`` the projector onto the factor columns,
    applied through :func:`annihilator_apply` (the n x n projector is never
    materialized). The minimizer in beta coincides with :func:`farm_select`
    for the linear family; the factor coefficients are recovered afterwards
    by the closed-form least-squares profile.

    Cross-validation here scores held-out rows of the projected system,
    which is the natural notion for this formulation.
    """
    X, y, scales = _prepare_design(X, y, standardize)
    n, p1 = X.shape

    if decomposition is None:
        K = _resolve_k(X, num_factors, center, k_max)
        if p1 <= K:
            raise DegenerateInputError(f"p-1={p1} must exceed K={K}")
        decomp = estimate_factors(X, K, center=center)
    else:
        decomp = decomposition
        K = decomp.num_factors

    F = decomp.factors
    U1 = np.column_stack([np.ones(n), decomp.idiosyncratic])
    U1_proj = annihilator_apply(F, U1) if K else U1
    y_proj = annihilator_apply(F, y[:, None])[:, 0] if K else y

    mask = make_penalty_mask(1 + p1, 0)
    path_p, cv, chosen_idx = _fit_with_selection(
        U1_proj, y_proj, LINEAR, mask, lam,
        n_lambdas=n_lambdas, lambda_min_ratio=lambda_min_ratio,
        n_folds=n_folds, seed=seed, cv_contiguous=cv_contiguous,
        tol=tol, max_iter=max_iter, k_factors=0, intercept_column=False,
        cv_refit=cv_refit,
    )

    # lift each profile fit back to the augmented parameterization
    W = np.column_stack([np.ones(n), decomp.idiosyncratic, F])
    mask_aug = make_penalty_mask(1 + p1 + K, K)
    lifted = []
    for f in path_p.fits:
        if K:
            gam = solve_spd(F.T @ F, F.T @ (y - U1 @ f.theta))
        else:
            gam = np.zeros(0)
        theta = np.concatenate([f.theta, gam])
        lifted.append(
            PenalizedFit(
                theta=theta,
                k_factors=K,
                lam=f.lam,
                objective=_augmented_objective(W, y, theta, f.lam, mask_aug),
                kkt_max_violation=_augmented_kkt(W, y, theta, f.lam, mask_aug),
                iterations=f.iterations,
                converged=f.converged,
            )
        )
    path = LambdaPath(lambdas=path_p.lambdas, fits=tuple(lifted))
    fit = path.fits[chosen_idx]
    return FarmSelectResult(
        factor_fit=decomp,
        K_used=K,
        lambda_chosen=float(path.lambdas[chosen_idx]),
        fit=fit,
        selected=fit.active_set,
        path=path,
        cv_scores=cv.scores if cv is not None else None,
        cv=cv,
        column_scales=scales,
    )


def _augmented_objective(W, y, theta, lam, mask) -> float:
    from .glm import neg_loglik

    return neg_loglik(LINEAR, y, W @ theta) + lam * float(np.abs(theta[mask]).sum())


def _augmented_kkt(W, y, theta, lam, mask) -> float:
    n = W.shape[0]
    g = W.T @ gradient_residuals(LINEAR, y, W @ theta) / n
    active = theta != 0.0
    viol = np.abs(g)
    viol = np.where(mask & active, np.abs(g + lam * np.sign(theta)), viol)
    viol = np.where(mask & ~active, np.maximum(np.abs(g) - lam, 0.0), viol)
    return float(viol.max())


def farm_screen(
    X,
    y,
    family: Union[str, GlmFamily] = "linear",
    num_factors: Union[str, int] = "auto",
    top_m: Optional[int] = None,
    *,
    center: bool = True,
    k_max: Optional[int] = None,
    max_iter: int = 50,
    tol: float = 1e-10,
) -> ScreeningResult:
    """Decorrelated marginal screening.

    For every covariate j fit the unpenalized GLM of y on
    (1, f_1..f_K, u_j) and score it by the absolute coefficient on u_j;
    return the ``top_m`` indices by score (descending, ties by index).
    Marginal fits that are degenerate (zero-variance residual column) or fail
    to converge get score 0 and a raised flag.
    """
    family = get_family(family)
    X, y, _ = _prepare_design(X, y, standardize=False)
    n, p1 = X.shape
    if top_m is None:
        top_m = p1
    if not (1 <= top_m <= p1):
        raise BadDimensionError(f"top_m={top_m} out of range [1, {p1}]")
    family.check_response(y)

    K = _resolve_k(X, num_factors, center, k_max)
    decomp = estimate_factors(X, K, center=center)
    U = decomp.idiosyncratic
    A = np.column_stack([np.ones(n), decomp.factors])  # shared columns
    q = A.shape[1]

    scores = np.zeros(p1)
    failed = np.zeros(p1, dtype=bool)
    col_ms = np.einsum("tj,tj->j", U, U) / n
    live = col_ms > 1e-14 * max(col_ms.max(), 1.0)
    failed[~live] = True
    idx = np.flatnonzero(live)
    if idx.size:
        coefs, bad = _batched_marginal_fits(
            A, U[:, idx], y, family, max_iter=max_iter, tol=tol
        )
        scores[idx] = np.abs(coefs[:, q])
        scores[idx[bad]] = 0.0
        failed[idx[bad]] = True

    order = np.argsort(-scores, kind="stable")  # ties broken by index
    return ScreeningResult(
        ranking=order[:top_m], scores=scores, failed=failed
    )


def _batched_marginal_fits(A, U, y, family, max_iter=50, tol=1e-10):
    """Newton fits of y ~ (A, u_j) for all columns u_j at once.

    Returns (coefficients (m, q+1), failed_mask (m,)).
    """
    n, q = A.shape
    m = U.shape[1]
    theta = np.zeros((m, q + 1))
    ridge = 1e-12

    def _predict(th):
        return A @ th[:, :q].T + U * th[:, q]

    def _nll_cols(Z):
        return np.mean(-y[:, None] * Z + family.cumulant(Z), axis=0)

    Z = _predict(theta)
    obj = _nll_cols(Z)
    converged = np.zeros(m, dtype=bool)
    for _ in range(max_iter):
        mu = family.mean(Z)
        wts = np.maximum(family.variance(Z), 1e-10)
        resid = mu - y[:, None]
        grad = np.empty((m, q + 1))
        grad[:, :q] = (A.T @ resid).T / n
        grad[:, q] = np.einsum("tj,tj->j", U, resid) / n
        H = np.empty((m, q + 1, q + 1))
        H[:, :q, :q] = np.einsum("tj,ti,tk->jik", wts, A, A) / n
        WU = wts * U
        cross = (A.T @ WU).T / n
        H[:, :q, q] = cross
        H[:, q, :q] = cross
        H[:, q, q] = np.einsum("tj,tj->j", WU, U) / n
        H += ridge * np.eye(q + 1)
        try:
            step = np.linalg.solve(H, grad[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack(
                [np.linalg.lstsq(H[j], grad[j], rcond=None)[0] for j in range(m)]
            )
        cand = theta - step
        Zc = _predict(cand)
        objc = _nll_cols(Zc)
        # per-column step halving where the Newton step overshoots
        for _h in range(30):
            worse = objc > obj + 1e-12
            if not worse.any():
                break
            cand[worse] = 0.5 * (theta[worse] + cand[worse])
            Zc[:, worse] = _predict(cand)[:, worse]
            objc[worse] = _nll_cols(Zc)[worse]
        moved = np.max(np.abs(cand - theta), axis=1)
        improved = objc <= obj + 1e-12
        theta = np.where(improved[:, None], cand, theta)
        Z = _predict(theta)
        obj = np.minimum(obj, objc)
        converged |= moved < tol * (1.0 + np.max(np.abs(theta), axis=1))
        if converged.all():
            break
        if family.name == "linear":
            converged[:] = True  # quadratic loss: one Newton step is exact
            break
    return theta, ~converged


def irrepresentable_stat(G, S) -> float:
    """||G_{S^c,S} (G_{S,S})^{-1}||_inf for a symmetric PSD cross-product G.

    The induced infinity norm (max absolute row sum) of the (p-|S|) x |S|
    representability matrix; values >= 1 indicate the L1 selection condition
    fails on this design.
    """
    G = as_matrix(G, "G")
    p = G.shape[0]
    if G.shape[1] != p:
        raise BadDimensionError(f"G must be square, got {G.shape}")
    S = np.asarray(S, dtype=np.int64).ravel()
    if S.size == 0 or S.size >= p:
        raise BadDimensionError("S must be a nonempty proper subset of the columns")
    if np.unique(S).size != S.size or S.min() < 0 or S.max() >= p:
        raise BadDimensionError("S contains duplicate or out-of-range indices")
    comp = np.setdiff1d(np.arange(p), S)
    G_SS = 0.5 * (G[np.ix_(S, S)] + G[np.ix_(S, S)].T)
    eigs = np.linalg.eigvalsh(G_SS)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > 1e10:
        raise RankDeficientError(
            f"G_SS condition {eigs[-1] / max(eigs[0], 1e-300):.3e} exceeds 1e10"
        )
    try:
        T = solve_spd(G_SS, G[np.ix_(S, comp)])
    except Exception as exc:  # Cholesky breakdown on a near-PSD block
        raise RankDeficientError(str(exc)) from exc
    return float(np.abs(T).sum(axis=0).max())


def gamma_inf(X1, S) -> float:
    """Sample irrepresentability of a design: irrepresentable_stat of X1^T X1.

    Pass the design with or without the intercept column depending on which
    convention is wanted; the statistic is computed on whatever is given.
    """
    X1 = as_matrix(X1, "X1")
    return irrepresentable_stat(X1.T @ X1, S)


def theory_constants(W, y, family, theta_star, S) -> SelectionDiagnostics:
    """Curvature, irrepresentability and score readouts at the truth.

    ``S`` is the support of ``theta_star`` over the augmented coordinates.
    The Hessian of the average loss at the truth is
    ``H = (1/n) W^T diag(b''(W theta*)) W``.
    """
    family = get_family(family)
    W = as_matrix(W, "W")
    y = as_vector(y, "y")
    theta_star = as_vector(theta_star, "theta_star")
    n, m = W.shape
    if theta_star.shape[0] != m:
        raise BadDimensionError("theta_star length does not match W")
    S = np.asarray(S, dtype=np.int64).ravel()
    if S.size == 0 or S.size > m:
        raise BadDimensionError("S must be a nonempty subset of the coordinates")
    comp = np.setdiff1d(np.arange(m), S)

    z = W @ theta_star
    wts = family.variance(z)
    H = (W * wts[:, None]).T @ W / n
    H_SS = H[np.ix_(S, S)]
    eigs = np.linalg.eigvalsh(H_SS)
    if eigs[0] <= 0:
        raise RankDeficientError("Hessian restricted to S is singular")
    A_inv = np.linalg.inv(H_SS)
    inv_inf = float(np.abs(A_inv).sum(axis=1).max())
    inv_2 = float(1.0 / eigs[0])
    if comp.size:
        irrep = float(np.abs(H[np.ix_(comp, S)] @ A_inv).sum(axis=1).max())
    else:
        irrep = 0.0

    score = W.T @ gradient_residuals(family, y, z) / n
    return SelectionDiagnostics(
        gamma_inf=irrep,
        tau=1.0 - irrep,
        kappa_inf=1.0 / inv_inf,
        kappa_2=1.0 / inv_2,
        epsilon=float(np.abs(score).max()),
        score_support_inf=float(np.abs(score[S]).max()),
        w_max=float(np.abs(W).max()),
        support_size=int(S.size),
    )


def theorem1_audit(
    fit: PenalizedFit,
    theta_star,
    S,
    constants: SelectionDiagnostics,
    family: Union[str, GlmFamily] = "linear",
    C: float = 5.0,
    smoothness_radius: float = np.inf,
) -> TheoremOneAudit:
    """Check the deterministic guarantee of the penalized estimator.

    Evaluates whether the tuning level sits inside the admissible window
    ``(7/tau) ||grad||_inf < lam < (kappa_2*/(4 sqrt(|S|))) min(A, kappa_inf* tau / (3M))``
    with the curvature constants calibrated conservatively from the readouts
    (``kappa* = kappa/2``, the largest values consistent with the assumption
    inequalities), ``A`` the smoothness radius (default unbounded) and
    ``M = M0^3 M3 |S|^(3/2)``, ``M0 = 2 max|W|``, ``M3`` the family's third
    derivative bound. When the window holds it reports whether the fitted
    support is contained in ``S``, whether the observed L-infinity error obeys
    the certified bound, and whether the signs match; outside the window no
    bound claim is made (``linf_ok=None``). Meaningful when every unpenalized
    coordinate is truly active (inside ``S``).
    """
    family = get_family(family)
    theta_star = as_vector(theta_star, "theta_star")
    S = np.asarray(S, dtype=np.int64).ravel()
    lam = fit.lam

    tau = constants.tau
    kappa_inf_t = constants.kappa_inf / 2.0
    kappa_2_t = constants.kappa_2 / 2.0
    s_aug = constants.support_size
    M0 = 2.0 * constants.w_max
    M3 = family.third_derivative_bound
    M = M0**3 * M3 * s_aug**1.5

    if tau > 0:
        window_low = (7.0 / tau) * constants.epsilon
        inner = smoothness_radius if M == 0 else min(
            smoothness_radius, kappa_inf_t * tau / (3.0 * M)
        )
        window_high = kappa_2_t / (4.0 * np.sqrt(s_aug)) * inner
        sign_window_high = (1.0 / tau) * (5.0 * C / 3.0 - 1.0) * constants.epsilon
    else:
        window_low, window_high, sign_window_high = np.inf, 0.0, 0.0
    window_ok = bool(window_low < lam < window_high)

    supp_hat = np.flatnonzero(fit.theta != 0.0)
    support_ok = bool(np.isin(supp_hat, S).all())

    linf_bound = 3.0 / (5.0 * kappa_inf_t) * (constants.score_support_inf + lam)
    observed = float(np.abs(fit.theta - theta_star).max())
    linf_ok = bool(observed <= linf_bound) if window_ok else None

    m = fit.theta.shape[0]
    p = m - fit.k_factors
    sign_ok = bool(
        np.array_equal(np.sign(fit.theta[:p]), np.sign(theta_star[:p]))
    )

    return TheoremOneAudit(
        lam=lam,
        window_low=float(window_low),
        window_high=float(window_high),
        window_ok=window_ok,
        support_ok=support_ok,
        linf_bound=float(linf_bound),
        observed_linf=observed,
        linf_ok=linf_ok,
        sign_ok=sign_ok,
        sign_window_high=float(sign_window_high),
        diagnostics=replace(
            constants,
            theorem1_support_ok=support_ok,
            theorem1_linf_bound=float(linf_bound),
            observed_linf_error=observed,
        ),
    )
