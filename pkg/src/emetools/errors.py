"""Shared exception types."""


class DataError(ValueError):
    """Base class for input-data contract violations (CLI exit code 2)."""


class LabelError(DataError):
    """Malformed node label."""


class TreeParseError(DataError):
    """Malformed bracketed-tree input."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class SuiteError(DataError):
    """Malformed query-suite or rule definition."""


class ExtractionError(DataError):
    """Malformed XML input."""


class ScoreContractError(DataError):
    """Scorer preconditions violated (impossible counts, mismatched corpora)."""
