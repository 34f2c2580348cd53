"""Exception types shared across the package."""


class MatboolError(Exception):
    """Base class for all package errors."""


class StoreMismatchError(MatboolError):
    """Raised when handles from different stores are combined."""


class RenameError(MatboolError):
    """Raised for colliding or order-incompatible rename maps."""


class DimensionError(MatboolError):
    """Raised on matrix or expression dimension mismatches."""


class WiringError(MatboolError):
    """Raised when gate/state variable wiring does not line up."""


class CapExceededError(MatboolError):
    """Raised when an operation exceeds its configured size cap."""


class ParseError(MatboolError):
    """Circuit text error carrying a 1-based line and column."""

    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.message = message
        self.line = line
        self.column = column
