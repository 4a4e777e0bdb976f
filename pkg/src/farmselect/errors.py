"""Exception hierarchy shared across the package."""


class FarmSelectError(Exception):
    """Base class for all errors raised by this package."""


class BadDimensionError(FarmSelectError):
    """Shapes or index ranges are inconsistent with the operation."""


class NonSymmetricError(FarmSelectError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


class NotPositiveDefiniteError(FarmSelectError):
    """Cholesky factorization hit a non-positive pivot."""


class NoConvergenceError(FarmSelectError):
    """Iteration budget exhausted before reaching tolerance."""


class DegenerateInputError(FarmSelectError):
    """Input carries no usable signal for the requested operation."""


class RankDeficientError(FarmSelectError):
    """A matrix that must be invertible is (numerically) singular."""


class NonFiniteObjectiveError(FarmSelectError):
    """Objective became NaN/Inf; the design is degenerate."""


class BadLabelError(FarmSelectError):
    """Response labels outside the set a family accepts."""


class LengthMismatchError(FarmSelectError):
    """Paired vectors have different lengths."""


class NonStationaryError(FarmSelectError):
    """A VAR(1) transition matrix has spectral radius >= 1."""


class DataError(FarmSelectError):
    """Malformed tabular input (missing cell, ragged row, bad number)."""
