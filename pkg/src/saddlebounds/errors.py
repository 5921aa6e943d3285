"""Exception types shared across the package."""


class SaddleBoundsError(Exception):
    """Base class for all package errors."""


class StructuralError(SaddleBoundsError):
    """Block dimensions are inconsistent with a double saddle-point layout."""


class UnsupportedLayoutError(SaddleBoundsError):
    """Requested assembly layout is undefined for these block shapes."""


class DefinitenessError(SaddleBoundsError):
    """A matrix required to be (semi)definite is not."""


class ParameterError(SaddleBoundsError):
    """Scalar parameters violate a documented precondition."""


class ClassificationError(SaddleBoundsError):
    """A cubic lacks the one-negative / two-positive real root pattern."""


class StrategyMismatchError(SaddleBoundsError):
    """An approximation strategy needs structure this system does not have."""


class ConvergenceError(SaddleBoundsError):
    """An iterative eigenvalue computation failed to certify its result.

    ``best`` carries the uncertified estimates for diagnostics.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class OracleSizeError(SaddleBoundsError):
    """A dense desk-scale computation was requested above its size cutoff."""
