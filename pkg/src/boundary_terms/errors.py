"""Exception hierarchy shared by every module of the package."""


class AuditError(Exception):
    """Base class for all package errors."""


class ParameterError(AuditError, ValueError):
    """A physical or numerical parameter is out of its allowed range."""


class ShapeError(AuditError, ValueError):
    """Sample arrays do not match the grid they are paired with."""


class UsageError(AuditError):
    """An operation was called with inputs it does not support."""


class IntegrityError(AuditError):
    """A structural contract (e.g. Hermiticity) is violated."""


class DegeneracyError(AuditError):
    """A band needed non-degenerate is (numerically) degenerate."""


class GaugeError(AuditError):
    """Phase alignment across a parameter family failed."""


class NumericalError(AuditError, RuntimeError):
    """A linear solve or propagation step failed."""


class ConfigError(AuditError):
    """A scenario configuration is malformed.

    ``key`` names the offending entry when one can be identified.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
