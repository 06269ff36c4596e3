"""Exception types raised by the numerical layers."""


class SpectralError(Exception):
    """Base class for all package-specific failures."""


class ConditioningError(SpectralError):
    """Cholesky factorization of the metric matrix failed after regularization."""


class SpectralRangeError(SpectralError):
    """Generalized eigenvalues fell outside the admissible [0, 1] range."""


class ExtrapolationError(SpectralError, ValueError):
    """A spline was evaluated too far outside its knot span."""


class PlanMismatch(SpectralError, ValueError):
    """A transform plan was applied to data from a different grid."""


class DegenerateTapers(SpectralError):
    """The taper set has no zero-frequency response to regress a line on."""
