"""Exception hierarchy.

Everything the CLI maps to exit code 2 derives from :class:`InputError`.
"""


class HoloArimaError(Exception):
    """Base class for all package errors."""


class InputError(HoloArimaError, ValueError):
    """Bad user input: unreadable file, malformed CSV, invalid arguments."""


class SchemaError(InputError):
    """A required CSV column is missing."""

    def __init__(self, column, available=()):
        self.column = column
        self.available = tuple(available)
        msg = f"missing column {column!r}"
        if self.available:
            msg += f" (header has: {', '.join(self.available)})"
        super().__init__(msg)


class CsvParseError(InputError):
    """A cell could not be parsed as a number."""

    def __init__(self, line, column, value):
        self.line = line
        self.column = column
        self.value = value
        super().__init__(f"line {line}: column {column!r}: cannot parse {value!r} as a number")


class TableValidationError(InputError):
    """Parsed values violate a table invariant (ordering, spacing)."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class OrderTooLargeError(InputError):
    """Differencing order is not smaller than the series length."""


class CannotInvertError(InputError):
    """A differenced series lacks the leading values needed for integration."""


class DegenerateSeriesError(InputError):
    """Series has zero variance (or is otherwise unusable)."""


class InsufficientDataError(InputError):
    """Too few observations for the requested computation."""


class ConvergenceError(HoloArimaError):
    """No usable estimate could be produced."""
