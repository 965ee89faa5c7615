# src/application/services/losses.py
import numpy as np
from scipy.special import log_softmax, softmax

from src.domain.exceptions import ValidationError


def slot_probabilities(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Temperature-scaled softmax; temperature 0 puts all mass on the first maximum."""
    logits = np.asarray(logits, dtype=np.float64)
    if temperature == 0:
        probs = np.zeros_like(logits)
        probs[int(np.argmax(logits))] = 1.0
        return probs
    return softmax(logits / temperature)


def location_loss(logits: np.ndarray, target_slot: int) -> float:
    """Cross-entropy of the slot distribution against a one-hot target slot."""
    logits = np.asarray(logits, dtype=np.float64)
    if not 1 <= target_slot <= logits.shape[0]:
        raise ValidationError(f"slot {target_slot} outside 1..{logits.shape[0]}", field="target_slot")
    return float(-log_softmax(logits)[target_slot - 1])


def content_loss(pred: np.ndarray, target: np.ndarray, prior_col: np.ndarray, lambda_prior: float) -> float:
    """L1 reconstruction plus a squared pull towards the prior column."""
    pred, target, prior_col = (np.asarray(v, dtype=np.float64) for v in (pred, target, prior_col))
    if not pred.shape == target.shape == prior_col.shape:
        raise ValidationError(
            f"shapes {pred.shape}, {target.shape}, {prior_col.shape} differ", field="target")
    return float(np.abs(pred - target).sum() + lambda_prior * np.square(pred - prior_col).sum())
