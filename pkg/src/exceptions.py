"""Custom exceptions for the inexact inertial ADMM package."""

from typing import Optional


class InertialAdmmException(Exception):
    """Base exception for the inexact inertial ADMM package."""
    pass


class DimensionMismatchError(InertialAdmmException):
    """Exception raised when two operands have incompatible dimensions."""

    def __init__(self, message: str, expected: Optional[int] = None, actual: Optional[int] = None):
        self.expected = expected
        self.actual = actual
        if expected is not None or actual is not None:
            message = f"{message} (expected dim {expected}, got dim {actual})"
        super().__init__(message)


class NonFiniteValueError(InertialAdmmException):
    """Exception raised when a vector is built from NaN or infinite entries."""

    def __init__(self, message: str, index: int = -1):
        self.index = index
        super().__init__(message)


class FactorizationError(InertialAdmmException):
    """Exception raised when a Cholesky factorization fails."""
    pass


class InnerSolverError(InertialAdmmException):
    """Exception raised when the second-block solver cannot certify a solution."""

    def __init__(self, message: str, last_residual: float = float("nan"),
                 iteration: Optional[int] = None):
        self.last_residual = last_residual
        self.iteration = iteration
        super().__init__(message)

    def __str__(self) -> str:
        base = super().__str__()
        if self.iteration is not None:
            return f"{base} [outer iteration {self.iteration}, last residual {self.last_residual:.3e}]"
        return f"{base} [last residual {self.last_residual:.3e}]"


class ConfigurationError(InertialAdmmException):
    """Exception raised for invalid solver parameters."""
    pass


class InvariantViolation(InertialAdmmException):
    """Exception raised by checked mode when an iteration breaks a proven identity or bound."""

    def __init__(self, name: str, iteration: int, gap: float):
        self.name = name
        self.iteration = iteration
        self.gap = gap
        super().__init__(f"Invariant '{name}' violated at iteration {iteration} (gap {gap:.3e})")


class CertificationError(InertialAdmmException):
    """Exception raised when a reference point fails its optimality certificate."""

    def __init__(self, message: str, worst_index: int = -1, violation: float = float("nan")):
        self.worst_index = worst_index
        self.violation = violation
        super().__init__(f"{message} (worst index {worst_index}, violation {violation:.3e})")


class OracleError(InertialAdmmException):
    """Exception raised when a ground-truth solver fails to reach its tolerance."""

    def __init__(self, message: str, last_residual: float = float("nan")):
        self.last_residual = last_residual
        super().__init__(message)


class DatasetError(InertialAdmmException):
    """Exception raised for unreadable or malformed datasets."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
