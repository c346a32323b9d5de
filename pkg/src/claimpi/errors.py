"""Exception types shared across the package.

Each family carries the CLI exit code it maps to.
"""


class ClaimPIError(Exception):
    exit_code = 2


class ParameterError(ClaimPIError, ValueError):
    """Invalid distribution or method parameter."""


class ConvergenceError(ClaimPIError, ArithmeticError):
    """Numeric inversion failed to reach its tolerance."""


class InfeasibleRanksError(ClaimPIError):
    """No pair of ranks achieves the requested coverage for this sample size."""

    exit_code = 3


class ExpressionError(ClaimPIError):
    """Base class for transformation-expression errors."""


class ExprSyntaxError(ExpressionError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExpressionError):
    pass


class VariableIndexError(ExpressionError):
    pass


class ArityError(ExpressionError):
    pass


class EvaluationDomainError(ExpressionError, ArithmeticError):
    """log of a non-positive number, division by zero, 0 to a negative power."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class NonnegativityError(ClaimPIError):
    """The transformation takes a negative value on the supplied features."""


class DataError(ClaimPIError):
    """Malformed or invalid tabular input."""


class ConfigError(ClaimPIError):
    """Invalid experiment configuration."""
