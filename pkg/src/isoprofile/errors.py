"""Exception types shared across the package; each maps to a CLI exit code."""


class UsageError(ValueError):
    exit_code = 2


class ResourceBudgetError(RuntimeError):
    """A computation would exceed its memory/size budget.

    ``attained`` records how far the computation got (a radius, a step count,
    ...) so callers can report partial progress.
    """

    exit_code = 3

    def __init__(self, message: str, attained=None):
        super().__init__(message)
        self.attained = attained


class NumericalError(RuntimeError):
    exit_code = 4

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
