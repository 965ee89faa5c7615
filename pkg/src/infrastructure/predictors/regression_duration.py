# src/infrastructure/predictors/regression_duration.py
"""Per-phone duration regression: the mean-collapsing baseline."""
import logging
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from src.application.services.optim import Adam
from src.domain.entities.utterance import Utterance
from src.domain.exceptions import TrainingDivergenceError, ValidationError
from src.domain.interfaces.predictors import TrainableModel
from src.domain.value_objects.configs import TrainConfig

MIN_DURATION = 1.0


class RegressionDurationModel(TrainableModel):
    """duration(phone) = weight[phone] + bias, fit with squared error."""

    kind = "regression_duration"

    def __init__(self, num_phone_ids: int, init_mean: float = MIN_DURATION,
                 rng: Optional[np.random.Generator] = None,
                 params: Optional[Dict[str, np.ndarray]] = None):
        self.num_phone_ids = num_phone_ids
        if params is None:
            weight = rng.normal(0.0, 0.1, num_phone_ids) if rng is not None else np.zeros(num_phone_ids)
            params = {"weight": weight, "bias": np.array([float(init_mean)])}
        self._params = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
        if self._params["weight"].shape != (num_phone_ids,):
            raise ValidationError(f"expected {num_phone_ids} weights", field="params")

    def parameters(self) -> Dict[str, np.ndarray]:
        return self._params

    def config_dict(self) -> Dict[str, Any]:
        return {"num_phone_ids": self.num_phone_ids}

    def raw(self, phones: Sequence[int]) -> np.ndarray:
        return self._params["weight"][np.asarray(phones, dtype=int)] + self._params["bias"][0]

    def predict(self, phones: Sequence[int]) -> np.ndarray:
        """Clamped at one frame."""
        return np.maximum(self.raw(phones), MIN_DURATION)

    @staticmethod
    def _flatten(batch: Sequence[Utterance]) -> Tuple[np.ndarray, np.ndarray]:
        phones = np.concatenate([np.asarray(u.phones, dtype=int) for u in batch])
        durations = np.concatenate([np.asarray(u.durations, dtype=np.float64) for u in batch])
        return phones, durations

    def loss_and_gradients(self, batch: Sequence[Utterance]) -> Tuple[float, Dict[str, np.ndarray]]:
        if not batch:
            raise ValidationError("batch is empty", field="batch")
        phones, durations = self._flatten(batch)
        err = self.raw(phones) - durations
        g = 2.0 * err / err.shape[0]
        grads = {
            "weight": np.bincount(phones, weights=g, minlength=self.num_phone_ids).astype(np.float64),
            "bias": np.array([g.sum()]),
        }
        return float(np.mean(err * err)), grads


def regression_duration_baseline(
    corpus: Sequence[Utterance],
    cfg: TrainConfig,
    num_phone_ids: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> RegressionDurationModel:
    """Fit the regression model with Adam from the corpus mean duration."""
    logger = logging.getLogger(__name__)
    if not corpus:
        raise ValidationError("corpus is empty", field="corpus")
    if num_phone_ids is None:
        num_phone_ids = 1 + max(max(u.phones) for u in corpus)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    mean = float(np.mean(np.concatenate([np.asarray(u.durations, dtype=np.float64) for u in corpus])))
    model = RegressionDurationModel(num_phone_ids, init_mean=mean)
    optimizer = Adam.from_config(model.parameters(), cfg)
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(corpus))
        for start in range(0, len(corpus), cfg.batch_size):
            loss, grads = model.loss_and_gradients([corpus[i] for i in order[start:start + cfg.batch_size]])
            if not np.isfinite(loss):
                raise TrainingDivergenceError(epoch, f"regression loss is {loss}")
            optimizer.step(grads)
    logger.info(f"regression durations fit on {len(corpus)} utterances, mean {mean:.3f}")
    return model
