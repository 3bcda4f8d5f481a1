"""Exception and warning types."""


class IsotropyError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(IsotropyError, ValueError):
    """Invalid input: malformed data, inconsistent parameters, unsupported lags."""


class NumericalError(IsotropyError, ArithmeticError):
    """A numerical procedure failed (singular matrix, factorization breakdown)."""


class IsotropyWarning(UserWarning):
    """Non-fatal condition such as discarded subblocks or incompatible window sizes."""
