"""Exception types raised by the toolkit."""


class CdgafsError(Exception):
    """Base class for all errors raised by :mod:`cdgafs`."""


class ParseError(CdgafsError, ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class ValidationError(CdgafsError, ValueError):
    """An argument or intermediate value violates a precondition."""
