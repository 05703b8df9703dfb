"""
Error types shared by the solver, the Monte Carlo oracle and the CLI.

Every error carries a machine-readable ``code`` (the class name) and an exit
category. Config-type errors exit with 2, runtime failures with 1.
"""
from typing import Optional

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


class DheomError(Exception):
    """Base class for all errors raised by this package"""
    exit_code = EXIT_FAILURE

    @property
    def code(self) -> str:
        return type(self).__name__

    def cli_line(self) -> str:
        return f"ERROR {self.code}: {self}"


# =============================================================================
# CONFIGURATION ERRORS (exit 2)
# =============================================================================

class ConfigError(DheomError):
    exit_code = EXIT_CONFIG


class ParseError(ConfigError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ConfigError):
    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(message)


class InvalidParameter(ValidationError):
    pass


class MeanOutOfDomain(ValidationError):
    pass


class TruncationUnsound(ValidationError):
    pass


class DegenerateRecurrence(ValidationError):
    pass


class DomainError(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class NotHermitian(ConfigError):
    pass


class InvalidDensityMatrix(ConfigError):
    pass


# =============================================================================
# RUNTIME ERRORS (exit 1)
# =============================================================================

class DepthCapExceeded(DheomError):
    pass


class StabilityGuard(DheomError):
    pass


class PopulationOutOfRange(DheomError):
    pass


class OracleMismatch(DheomError):
    pass
