"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """A computation produced non-finite or runaway values (CLI exit code 3)."""

    def __init__(self, message, step=None, **details):
        super().__init__(message)
        self.step = step
        self.details = details


class ConvergenceError(NumericalError):
    """An iterative method hit its iteration cap."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message, residual=residual, iterations=iterations)
        self.residual = residual
        self.iterations = iterations


class SupercriticalFieldError(ValueError):
    """Born-Infeld radicand is negative: the field exceeds the critical strength."""
