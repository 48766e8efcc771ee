"""Exception types shared across the package."""


class HeeschError(Exception):
    """Base class for all errors raised by this package."""


class InvalidCellError(HeeschError, ValueError):
    """A cell or transform is not valid for the grid it is used with."""


class TransformRangeError(HeeschError, OverflowError):
    """A translation left the packable [-128, 127] range."""


class ParseError(HeeschError, ValueError):
    """Malformed text input (shape lines, boundary words, witnesses, solver output)."""

    def __init__(self, message, token=None, line=None):
        super().__init__(message)
        self.token = token
        self.line = line


class IntegrityError(HeeschError):
    """Placements that were promised to be disjoint overlap."""


class HoledInputError(HeeschError, ValueError):
    """The input shape is not simply connected."""


class ResourceLimitError(HeeschError):
    """A request exceeds a configured size limit."""
