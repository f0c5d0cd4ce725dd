"""Shared exception types."""


class CutTreeLabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CutTreeLabError, ValueError):
    """A parameter is outside its mathematical domain."""


class InputError(CutTreeLabError, ValueError):
    """Malformed input data (codings, permutations, configs)."""


class GuardError(CutTreeLabError, ValueError):
    """A size guard for an exact-enumeration routine was exceeded."""


class RetryExhaustedError(CutTreeLabError, RuntimeError):
    """A rejection sampler ran out of its attempt budget."""

    def __init__(self, message, attempts=None, n=None):
        super().__init__(message)
        self.attempts = attempts
        self.n = n
