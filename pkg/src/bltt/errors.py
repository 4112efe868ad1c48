"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain where a formula is defined."""


class SingularOperatorError(ArithmeticError):
    """A structured operator or inversion formula would divide by ~0."""


class BreakdownError(ArithmeticError):
    """A Krylov recurrence broke down (a scalar it divides by vanished)."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class DenseCapExceeded(MemoryError):
    """A dense diagnostic was requested above the configured size cap."""


class ConfigError(ValueError):
    """An experiment configuration is malformed."""
