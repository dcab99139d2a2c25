"""Exception types shared across the toolkit."""


class InputError(ValueError):
    """Arguments violate an operation's preconditions."""


class SingularInputError(InputError):
    """Arguments sit on a singularity of the formula (e.g. r = 0)."""


class NoThresholdError(InputError):
    """Regime thresholds requested for a = 0, where none is finite."""


class ConvergenceError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested accuracy."""

    def __init__(self, message, value=None, abs_error=None, evaluations=None):
        super().__init__(message)
        self.value = value
        self.abs_error = abs_error
        self.evaluations = evaluations


class CensoringError(RuntimeError):
    """Too many simulated paths reached the horizon without exiting."""
