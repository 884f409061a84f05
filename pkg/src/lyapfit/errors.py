"""Exception hierarchy.

Errors deriving from :class:`NumericalFailure` signal that the inputs were
well formed but the numerical problem could not be solved (the CLI maps
them to exit code 3). Plain ``ValueError`` subclasses signal invalid input.
"""


class LyapfitError(Exception):
    pass


class NumericalFailure(LyapfitError):
    pass


class DuplicateSiteError(NumericalFailure, ValueError):
    """Two sites coincide, so Voronoi cells and Gram matrices are undefined."""


class SmoothnessError(LyapfitError, ValueError):
    """The kernel is not smooth enough for the requested derivative."""


class SolverError(NumericalFailure):
    """A linear solve failed or produced an unacceptable residual."""

    def __init__(self, message, condition=None):
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class SmallFieldError(NumericalFailure):
    """Collocation points where the field is (numerically) zero."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = list(indices)


class EmptyRegionError(NumericalFailure):
    pass


class NotInBasinError(NumericalFailure):
    pass


class NoCrossingError(NumericalFailure):
    pass
