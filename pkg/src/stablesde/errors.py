"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class AssumptionViolation(DomainError):
    """A hypothesis of a stability bound (e.g. B < 1, S < 1) fails for the inputs."""


class ConstructionError(RuntimeError):
    """A constrained object (e.g. a mollifier) could not be built; the message
    names the violated bound."""


class NumericError(RuntimeError):
    """A quadrature or iteration failed to reach its tolerance.

    Carries the best available estimate and the achieved error bound so
    callers can decide whether to degrade gracefully.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
