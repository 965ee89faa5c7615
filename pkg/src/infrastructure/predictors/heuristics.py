# src/infrastructure/predictors/heuristics.py
import numpy as np

from src.domain.entities.spectrogram import Spectrogram
from src.domain.interfaces.predictors import ContentModel, LocationModel


class UniformLocationModel(LocationModel):
    """Zero logits: every slot equally likely."""

    def score_slots(self, x_t: Spectrogram, mu_t: Spectrogram, t: float) -> np.ndarray:
        return np.zeros(x_t.L)


class PriorContentModel(ContentModel):
    """Zero residual: the prediction is the prior column itself."""

    def predict(self, x_masked: Spectrogram, mu_t: Spectrogram, t: float, s: int) -> np.ndarray:
        return mu_t.column(s)
