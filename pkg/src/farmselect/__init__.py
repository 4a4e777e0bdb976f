"""Factor-adjusted regularized model selection.

Estimate a latent factor structure in correlated covariates by PCA, then run
partially-penalized L1 regression on the decorrelated augmented design.
Plain lasso is the zero-factor special case. Ships with irrepresentability
diagnostics, decorrelated screening, seeded simulation benchmarks and a
rolling-window forecast evaluator; see the ``farmselect`` CLI.
"""

from .errors import (
    BadDimensionError,
    BadLabelError,
    DataError,
    DegenerateInputError,
    FarmSelectError,
    LengthMismatchError,
    NoConvergenceError,
    NonFiniteObjectiveError,
    NonStationaryError,
    NonSymmetricError,
    NotPositiveDefiniteError,
    RankDeficientError,
)
from .factor import (
    FactorDecomposition,
    annihilator_apply,
    default_k_max,
    estimate_factors,
    select_num_factors,
)
from .glm import (
    LINEAR,
    LOGISTIC,
    GlmFamily,
    get_family,
    gradient_residuals,
    neg_loglik,
)
from .ndlinalg import EigenPairs, solve_spd, sym_eigen_topk
from .pipeline import (
    FarmSelectResult,
    ScreeningResult,
    SelectionDiagnostics,
    TheoremOneAudit,
    farm_screen,
    farm_select,
    farm_select_linear_profile,
    gamma_inf,
    irrepresentable_stat,
    theorem1_audit,
    theory_constants,
)
from .simbench import (
    CalibratedParams,
    DesignSpec,
    MethodSpec,
    SimulationReport,
    gen_calibrated_linear,
    gen_equicorrelated,
    gen_logistic_designs,
    run_replications,
    score_selection,
)
from .solver import (
    CrossValidation,
    LambdaPath,
    PenalizedFit,
    cross_validate,
    fit_lambda_path,
    fit_penalized,
    kkt_check,
    lambda_path_grid,
    make_penalty_mask,
    soft_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "BadDimensionError",
    "BadLabelError",
    "CalibratedParams",
    "CrossValidation",
    "DataError",
    "DegenerateInputError",
    "DesignSpec",
    "EigenPairs",
    "FactorDecomposition",
    "FarmSelectError",
    "FarmSelectResult",
    "GlmFamily",
    "LINEAR",
    "LOGISTIC",
    "LambdaPath",
    "LengthMismatchError",
    "MethodSpec",
    "NoConvergenceError",
    "NonFiniteObjectiveError",
    "NonStationaryError",
    "NonSymmetricError",
    "NotPositiveDefiniteError",
    "PenalizedFit",
    "RankDeficientError",
    "ScreeningResult",
    "SelectionDiagnostics",
    "SimulationReport",
    "TheoremOneAudit",
    "annihilator_apply",
    "cross_validate",
    "default_k_max",
    "estimate_factors",
    "farm_screen",
    "farm_select",
    "farm_select_linear_profile",
    "fit_lambda_path",
    "fit_penalized",
    "gamma_inf",
    "gen_calibrated_linear",
    "gen_equicorrelated",
    "gen_logistic_designs",
    "get_family",
    "gradient_residuals",
    "irrepresentable_stat",
    "kkt_check",
    "lambda_path_grid",
    "make_penalty_mask",
    "neg_loglik",
    "run_replications",
    "score_selection",
    "select_num_factors",
    "soft_threshold",
    "solve_spd",
    "sym_eigen_topk",
    "theorem1_audit",
    "theory_constants",
]
