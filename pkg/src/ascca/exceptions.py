"""Exception types raised by the ascca package."""


class AsccaError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(AsccaError):
    """Array arguments have incompatible shapes."""


class NotPositiveDefinite(AsccaError):
    """A matrix required to be symmetric positive definite is not.

    Typically raised when a Gram matrix is rank deficient; increasing
    the ridge blending weight ``alpha`` usually fixes it.
    """


class RankDeficientStep(AsccaError):
    """A retraction step left the rank-r regime; the step was too large."""


class SvdFailure(AsccaError):
    """A singular value decomposition failed to converge."""


class DegenerateColumn(AsccaError):
    """A data column cannot be normalized (zero or constant)."""


class DegenerateDraw(AsccaError):
    """Random loading draws stayed rank deficient after many retries."""


class RankDeficient(AsccaError):
    """A matrix that must have full column rank does not."""


class ZeroVariance(AsccaError):
    """A projected variable has (numerically) zero variance."""


class InfeasibleInit(AsccaError):
    """An initial point violates its manifold constraint."""


class ConvergenceFailure(AsccaError):
    """An iterative solver exhausted its iteration budget without
    reaching the requested tolerance and the caller asked for strict
    behaviour."""


class FoldTooSmall(AsccaError):
    """A cross-validation fold has fewer rows than the model needs."""


class ParseError(AsccaError):
    """A data file could not be parsed; the message names the location."""


class ConfigError(AsccaError):
    """Invalid configuration value (bad flag, nonpositive tolerance, ...)."""
