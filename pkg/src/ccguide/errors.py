"""Exception types raised across the package."""


class CcguideError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CcguideError, ValueError):
    """Bad shapes, non-finite values or out-of-range parameters."""


class InsufficientDataError(CcguideError, ValueError):
    """Too few samples for the requested estimate."""


class NumericalFailureError(CcguideError, ArithmeticError):
    """An iterative routine failed to converge or a matrix is singular."""


class TrainingDivergedError(CcguideError, RuntimeError):
    """Loss became non-finite during training.

    The partial report (epochs completed before the failure) is kept on
    ``report`` so callers can still persist it.
    """

    def __init__(self, epoch, report=None, reason="non-finite loss"):
        super().__init__(f"training diverged at epoch {epoch}: {reason}")
        self.epoch = epoch
        self.report = report


class ParseError(CcguideError, ValueError):
    """Malformed CSV input. ``line`` is the 1-based file line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CheckpointError(CcguideError, ValueError):
    """Unreadable, truncated or version-mismatched checkpoint."""
