# src/domain/interfaces/predictors.py
from abc import ABC, abstractmethod
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from src.domain.entities.spectrogram import Spectrogram


class LocationModel(ABC):
    """Scores the L insertion slots of a state; logit j belongs to slot j + 1."""

    @abstractmethod
    def score_slots(self, x_t: Spectrogram, mu_t: Spectrogram, t: float) -> np.ndarray:
        """Return L finite logits for a state of length L."""
        pass


class ContentModel(ABC):
    """Predicts the clean content of a masked column as a residual over its prior."""

    @abstractmethod
    def predict(self, x_masked: Spectrogram, mu_t: Spectrogram, t: float, s: int) -> np.ndarray:
        """Return the D-entry clean column for index `s` of the masked state."""
        pass


class ScoreFunction(ABC):
    """Estimate of grad_x log p_t(x) for a whole state."""

    @abstractmethod
    def score(self, x: Spectrogram, mu: Spectrogram, t: float) -> np.ndarray:
        pass


class TrainableModel(ABC):
    """A model with float64 parameters and analytic gradients of its batch loss."""

    kind: str = "model"

    @abstractmethod
    def parameters(self) -> Dict[str, np.ndarray]:
        """Named parameter arrays; optimizers update them in place."""
        pass

    @abstractmethod
    def loss_and_gradients(self, batch: Sequence[Any]) -> Tuple[float, Dict[str, np.ndarray]]:
        """Mean loss over the batch and its gradient for every parameter."""
        pass

    def batch_loss(self, batch: Sequence[Any]) -> float:
        loss, _ = self.loss_and_gradients(batch)
        return loss

    def config_dict(self) -> Dict[str, Any]:
        return {}
