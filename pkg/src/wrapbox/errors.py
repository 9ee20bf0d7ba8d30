"""Exception types shared across the package."""


class WrapboxError(Exception):
    """Base class for all package errors."""


class ValidationError(WrapboxError, ValueError):
    """Bad user input: shapes, ranges, hyperparameters, preconditions."""


class DatasetFormatError(ValidationError):
    """A dataset file violates the on-disk contract.

    Carries the row index and/or byte offset of the first violation when
    they are known.
    """

    def __init__(self, message, *, row=None, offset=None):
        detail = message
        if row is not None:
            detail += f" (row {row})"
        if offset is not None:
            detail += f" (byte offset {offset})"
        super().__init__(detail)
        self.row = row
        self.offset = offset


class PolicyUnavailableError(ValidationError):
    """Requested explanation policy does not apply to this model class."""
