"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ConvergenceError(ArithmeticError):
    """A series or iteration did not converge within its budget.

    The partial result is kept on the exception so callers can inspect
    how far the computation got.
    """

    def __init__(self, message, partial=None, n_terms=None):
        super().__init__(message)
        self.partial = partial
        self.n_terms = n_terms


class ConfigError(ValueError):
    """A run configuration failed validation. ``field`` names the culprit."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
