"""Exception hierarchy shared by every module."""


class PlacementError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PlacementError):
    """Inconsistent configuration or parameter dimensions."""


class ParseError(PlacementError):
    """A market file does not conform to its schema."""

    def __init__(self, path, row, field, message):
        self.path = str(path)
        self.row = row
        self.field = field
        super().__init__(f"{self.path}: row {row}, field {field!r}: {message}")


class ValidationError(PlacementError):
    """Market records violate a domain invariant."""


class DomainError(PlacementError, ValueError):
    """An argument is outside the domain of an operation."""


class DataError(PlacementError):
    """Observed data is impossible under the model (zero likelihood)."""
