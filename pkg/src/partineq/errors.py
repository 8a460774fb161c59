"""Exception hierarchy shared by all modules."""


class PartineqError(Exception):
    """Base class for every error raised by this package."""


class CapacityError(PartineqError):
    """A table would exceed the configured memory budget."""

    def __init__(self, message, max_n=None):
        super().__init__(message)
        self.max_n = max_n


class DomainError(PartineqError, ValueError):
    """Input outside the domain where a formula is defined."""


class HypothesisViolation(PartineqError):
    """A hypothesis required by a bound does not hold.

    ``constraint`` names the failing condition.
    """

    def __init__(self, constraint, message=None):
        super().__init__(message or f"hypothesis violated: {constraint}")
        self.constraint = constraint


class MethodFailure(PartineqError):
    """The threshold method cannot produce a bound for this d."""


class CertificationFailure(PartineqError):
    """A constant could not be certified (e.g. no admissible y_max)."""


class RootBracketError(PartineqError):
    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class CheckpointError(PartineqError):
    """Checkpoint file is corrupt, truncated or belongs to another job."""


class ConfigError(PartineqError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
