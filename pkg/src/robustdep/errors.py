"""Exception hierarchy shared by the library and the CLI."""


class RobustDepError(Exception):
    """Base class for all package errors."""


class DataError(RobustDepError, ValueError):
    """Input data violates a precondition (non-finite values, bad files, ...)."""


class DegenerateSeriesError(DataError):
    """A (transformed) series or group has zero sample variance."""


class ConfigError(RobustDepError, ValueError):
    """Invalid parameters or configuration."""


class NumericalError(RobustDepError, ArithmeticError):
    """A numerical procedure failed (no bracket, non-convergence, ...)."""
