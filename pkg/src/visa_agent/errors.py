"""Exception types shared across the engine."""


class VisaError(Exception):
    """Base class for all engine errors."""


class TransportError(VisaError):
    """The live chat backend could not be reached or returned garbage."""


class MockMiss(VisaError):
    """A strict mock script had no (or more than one) entry for a request."""


class ParseError(VisaError):
    """Model output did not contain the expected JSON payload."""


class StageFailure(VisaError):
    """A workflow stage could not produce a usable result.

    The orchestrator converts this into an invalid-command status instead of
    crashing the clip.
    """


class SourceExhausted(VisaError):
    """A transcript source has no further input to offer."""


class SchemaError(VisaError):
    """A dataset or config file failed validation."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class UnknownStructure(VisaError):
    """A command referenced an anatomical structure missing from the manifest."""


class OutOfBounds(VisaError):
    """A slice index fell outside the volume (unreachable after clamping)."""
