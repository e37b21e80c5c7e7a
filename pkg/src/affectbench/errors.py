"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ValidationError -> 1,
PredictorError -> 2, FrameDecodeError and OSError -> 3.
"""


class AffectbenchError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(AffectbenchError):
    """Bad parameters, malformed manifests, or violated preconditions."""


class FrameDecodeError(AffectbenchError):
    """An image file could not be decoded into an 8-bit RGB frame."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


class PredictorError(AffectbenchError):
    """Predictor subprocess failure or wire-protocol violation."""

    def __init__(self, message: str, last_good_id: int | None = None):
        self.last_good_id = last_good_id
        super().__init__(message)
