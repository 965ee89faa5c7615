# src/infrastructure/predictors/conv_models.py
"""Trainable convolutional location and content predictors (numpy, float64)."""
import logging
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import softmax

from src.application.services.forward_process import TrainingTriplet
from src.application.services.losses import content_loss, location_loss
from src.domain.entities.spectrogram import Spectrogram
from src.domain.exceptions import ValidationError
from src.domain.interfaces.predictors import ContentModel, LocationModel, TrainableModel
from src.domain.value_objects.configs import ModelConfig
from src.infrastructure.predictors.conv_stack import ConvStack

RUN_FEATURES = 3


def run_features(mu: Spectrogram) -> np.ndarray:
    """Log run length, run-start and run-end flags of each column's run of identical prior columns."""
    L = mu.L
    if L == 0:
        return np.zeros((RUN_FEATURES, 0))
    same_as_prev = np.zeros(L, dtype=bool)
    same_as_prev[1:] = np.all(mu.data[:, 1:] == mu.data[:, :-1], axis=0)
    starts = ~same_as_prev
    run_id = np.cumsum(starts) - 1
    run_length = np.bincount(run_id)[run_id]
    ends = np.ones(L, dtype=bool)
    ends[:-1] = starts[1:]
    return np.vstack([np.log(run_length), starts, ends]).astype(np.float64)


def _time_row(t: float, L: int) -> np.ndarray:
    return np.full((1, L), float(t))


class _ConvModel(TrainableModel):

    def __init__(self, num_bins: int, in_channels: int, config: ModelConfig,
                 rng: Optional[np.random.Generator] = None,
                 params: Optional[Dict[str, np.ndarray]] = None):
        self.logger = logging.getLogger(__name__)
        self.num_bins = num_bins
        self.config = config
        self.stack = ConvStack(in_channels, config.hidden_channels, config.num_layers)
        if params is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            params = self.stack.init_params(rng, config.init_scale)
            params.update(self._init_head(rng))
        self._params = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
        expected = set(self._init_head(np.random.default_rng(0))) | set(
            self.stack.init_params(np.random.default_rng(0), 1.0))
        if set(self._params) != expected:
            raise ValidationError(
                f"parameter names {sorted(self._params)} do not match {sorted(expected)}", field="params")

    def _init_head(self, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        raise NotImplementedError

    def parameters(self) -> Dict[str, np.ndarray]:
        return self._params

    def config_dict(self) -> Dict[str, Any]:
        return {
            "num_bins": self.num_bins,
            "hidden_channels": self.config.hidden_channels,
            "num_layers": self.config.num_layers,
            "init_scale": self.config.init_scale,
        }

    def _zero_grads(self) -> Dict[str, np.ndarray]:
        return {name: np.zeros_like(p) for name, p in self._params.items()}

    def _check_state(self, x: Spectrogram, mu: Spectrogram) -> None:
        if x.shape != mu.shape:
            raise ValidationError(f"x {x.shape} and mu {mu.shape} differ", field="mu_t")
        if x.D != self.num_bins:
            raise ValidationError(f"model expects {self.num_bins} bins, got {x.D}", field="x")


class ConvLocationModel(_ConvModel, LocationModel):
    """Per-column conv features scored by a linear head; logit j belongs to slot j + 1."""

    kind = "conv_location"

    def __init__(self, num_bins: int, config: ModelConfig = ModelConfig(),
                 rng: Optional[np.random.Generator] = None,
                 params: Optional[Dict[str, np.ndarray]] = None):
        super().__init__(num_bins, 2 * num_bins + 1 + RUN_FEATURES, config, rng, params)

    def _init_head(self, rng):
        return {"head.weight": rng.normal(0.0, self.config.init_scale, self.config.hidden_channels)}

    def features(self, x: Spectrogram, mu: Spectrogram, t: float) -> np.ndarray:
        return np.vstack([x.data, mu.data, _time_row(t, x.L), run_features(mu)])

    def _forward(self, x, mu, t):
        A, caches = self.stack.forward(self.features(x, mu, t), self._params)
        return self._params["head.weight"] @ A, A, caches

    def score_slots(self, x_t: Spectrogram, mu_t: Spectrogram, t: float) -> np.ndarray:
        self._check_state(x_t, mu_t)
        logits, _, _ = self._forward(x_t, mu_t, t)
        return logits

    def loss_and_gradients(self, batch: Sequence[TrainingTriplet]) -> Tuple[float, Dict[str, np.ndarray]]:
        if not batch:
            raise ValidationError("batch is empty", field="batch")
        grads = self._zero_grads()
        total = 0.0
        for triplet in batch:
            logits, A, caches = self._forward(triplet.x_minus_k, triplet.mu_minus_k, triplet.t)
            total += location_loss(logits, triplet.s_target)
            dlogits = softmax(logits)
            dlogits[triplet.s_target - 1] -= 1.0
            grads["head.weight"] += A @ dlogits
            self.stack.backward(np.outer(self._params["head.weight"], dlogits), caches, self._params, grads)
        n = len(batch)
        return total / n, {name: g / n for name, g in grads.items()}


class ConvContentModel(_ConvModel, ContentModel):
    """Residual content head over the in-place masked state: x0_hat = mu[:, s] + W a_s + b."""

    kind = "conv_content"

    def __init__(self, num_bins: int, config: ModelConfig = ModelConfig(),
                 rng: Optional[np.random.Generator] = None,
                 params: Optional[Dict[str, np.ndarray]] = None,
                 lambda_prior: float = 0.01):
        super().__init__(num_bins, 2 * num_bins + 2, config, rng, params)
        self.lambda_prior = lambda_prior

    def config_dict(self) -> Dict[str, Any]:
        return {**super().config_dict(), "lambda_prior": self.lambda_prior}

    def _init_head(self, rng):
        return {
            "out.weight": rng.normal(0.0, self.config.init_scale, (self.num_bins, self.config.hidden_channels)),
            "out.bias": np.zeros(self.num_bins),
        }

    def features(self, x_masked: Spectrogram, mu: Spectrogram, t: float, s: int) -> np.ndarray:
        mask = np.zeros((1, x_masked.L))
        mask[0, s] = 1.0
        return np.vstack([x_masked.data, mu.data, _time_row(t, x_masked.L), mask])

    def _forward(self, x_masked, mu, t, s):
        if not 0 <= s < x_masked.L:
            raise IndexError(f"column {s} out of range for length {x_masked.L}")
        A, caches = self.stack.forward(self.features(x_masked, mu, t, s), self._params)
        delta = self._params["out.weight"] @ A[:, s] + self._params["out.bias"]
        return mu.data[:, s] + delta, A, caches

    def predict(self, x_masked: Spectrogram, mu_t: Spectrogram, t: float, s: int) -> np.ndarray:
        self._check_state(x_masked, mu_t)
        pred, _, _ = self._forward(x_masked, mu_t, t, s)
        return pred

    def loss_and_gradients(self, batch: Sequence[TrainingTriplet]) -> Tuple[float, Dict[str, np.ndarray]]:
        if not batch:
            raise ValidationError("batch is empty", field="batch")
        grads = self._zero_grads()
        total = 0.0
        for triplet in batch:
            k = triplet.k
            x_masked = triplet.x_t.with_column(k, np.zeros(triplet.x_t.D))
            prior = triplet.mu_t.data[:, k]
            pred, A, caches = self._forward(x_masked, triplet.mu_t, triplet.t, k)
            total += content_loss(pred, triplet.x0_k, prior, self.lambda_prior)
            ddelta = np.sign(pred - triplet.x0_k) + 2.0 * self.lambda_prior * (pred - prior)
            grads["out.weight"] += np.outer(ddelta, A[:, k])
            grads["out.bias"] += ddelta
            dA = np.zeros_like(A)
            dA[:, k] = self._params["out.weight"].T @ ddelta
            self.stack.backward(dA, caches, self._params, grads)
        n = len(batch)
        return total / n, {name: g / n for name, g in grads.items()}
