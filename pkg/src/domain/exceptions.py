# src/domain/exceptions.py
from typing import Optional


class JumpDiffusionError(Exception):
    """Base class for every error raised by the toolkit."""


class ValidationError(JumpDiffusionError, ValueError):
    """Invalid input or configuration. `field` names the offending value when known."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class CorruptFileError(ValidationError):
    """A binary artifact has the wrong magic, version or size."""


class NoDeletableFrameError(JumpDiffusionError):
    """Every column of the state is protected, so no jump target exists."""


class TrainingDivergenceError(JumpDiffusionError):
    """A loss became non-finite during training."""

    def __init__(self, epoch: int, message: str = "non-finite loss"):
        super().__init__(f"training diverged at epoch {epoch}: {message}")
        self.epoch = epoch


class UnsupportedOperationError(JumpDiffusionError):
    """The predictor cannot answer the query (e.g. an oracle without ground truth)."""
