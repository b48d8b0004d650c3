"""Exception types shared across the package."""


class UsageError(ValueError):
    """Inputs that violate an operation's preconditions."""


class NumericalFailure(ArithmeticError):
    """An iterative routine did not converge.

    ``best`` carries the best estimate reached before giving up.
    """

    def __init__(self, message: str, best: float | None = None):
        super().__init__(message)
        self.best = best
