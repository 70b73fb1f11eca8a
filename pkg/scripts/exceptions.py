"""
Custom exceptions for the friction estimation toolkit.
"""
from typing import Any, Optional


class FrictionToolError(Exception):
    """Base exception for all toolkit errors."""
    pass


class ConfigurationError(FrictionToolError, ValueError):
    """Raised when a parameter, scenario or override is invalid."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class ContactModelError(FrictionToolError, ValueError):
    """Base exception for contact model evaluation errors."""
    pass


class DomainError(ContactModelError):
    """Raised when an argument is outside the domain of an operation."""
    pass


class UndefinedRatiosError(ContactModelError):
    """Raised when motion ratios are requested for a zero scaled twist."""
    pass


class RegimeError(ContactModelError):
    """Raised when the ellipsoid model is evaluated near stiction."""
    pass


class DegenerateTwistError(ContactModelError):
    """Raised when no contact cell moves under the given twist."""
    pass


class StreamError(FrictionToolError):
    """Raised when measurement timestamps are not strictly increasing."""
    pass


class MeasurementError(FrictionToolError, ValueError):
    """Raised when a measurement contains NaN or infinite fields."""
    pass


class TraceError(FrictionToolError):
    """Base exception for trace file errors."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


class TraceSchemaError(TraceError):
    """Raised when a trace file is empty or misses a column."""

    def __init__(self, message: str, path: Optional[str] = None, column: Optional[str] = None):
        super().__init__(message, path)
        self.column = column


class TraceOrderingError(TraceError):
    """Raised when trace timestamps are not strictly increasing."""

    def __init__(self, message: str, path: Optional[str] = None, row: Optional[int] = None):
        super().__init__(message, path)
        self.row = row


class TraceValueError(TraceError):
    """Raised when a trace holds NaN, infinite or non-numeric values."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        row: Optional[int] = None,
        column: Optional[str] = None,
    ):
        super().__init__(message, path)
        self.row = row
        self.column = column


class AlignmentError(FrictionToolError):
    """Raised when force and velocity streams do not overlap in time."""
    pass


class StatsError(FrictionToolError):
    """Base exception for statistics errors."""
    pass


class WindowingError(StatsError):
    """Raised when no record passes the window rule."""
    pass


class InsufficientDataError(StatsError):
    """Raised when too few trials exist for the between-trial spread."""

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial
