"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the region where a formula or bound is valid."""


class ResourceError(RuntimeError):
    """Requested computation exceeds the configured memory or time budget."""


class AccuracyError(ArithmeticError):
    """Numerical tolerance could not be reached.

    The best available estimate and its error estimate are kept on the
    exception so callers can decide whether to accept them.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
