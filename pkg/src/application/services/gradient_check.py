# src/application/services/gradient_check.py
import logging
from typing import Any, Dict, Sequence

import numpy as np

from src.domain.exceptions import ValidationError
from src.domain.interfaces.predictors import TrainableModel

logger = logging.getLogger(__name__)


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / denom)


def numeric_gradients(model: TrainableModel, batch: Sequence[Any], step: float = 1e-4) -> Dict[str, np.ndarray]:
    """Central differences of the batch loss, one parameter entry at a time."""
    numeric = {}
    for name, param in model.parameters().items():
        grad = np.zeros_like(param)
        for idx in np.ndindex(param.shape):
            original = param[idx]
            param[idx] = original + step
            plus = model.batch_loss(batch)
            param[idx] = original - step
            minus = model.batch_loss(batch)
            param[idx] = original
            grad[idx] = (plus - minus) / (2.0 * step)
        numeric[name] = grad
    return numeric


def gradient_check(model: TrainableModel, batch: Sequence[Any], step: float = 1e-4) -> float:
    """Largest per-tensor relative error between analytic and finite-difference gradients."""
    if not model.parameters():
        raise ValidationError("model has no parameters", field="model")
    _, analytic = model.loss_and_gradients(batch)
    numeric = numeric_gradients(model, batch, step)
    errors = {name: relative_error(analytic[name], numeric[name]) for name in numeric}
    worst = max(errors.values())
    logger.debug(f"gradient check for {model.kind}: {errors}")
    return worst
