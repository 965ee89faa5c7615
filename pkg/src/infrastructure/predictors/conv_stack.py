# src/infrastructure/predictors/conv_stack.py
"""Kernel-3 convolution layers over frame columns with tanh activations.

A layer maps C x L to H x L: U = [X_{j-1}; X_j; X_{j+1}] (zero padded),
A = tanh(W U + b). Backward passes are written out by hand.
"""
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

KERNEL = 3


def unfold(X: np.ndarray) -> np.ndarray:
    """C x L -> 3C x L stack of left, centre and right neighbours."""
    C, L = X.shape
    padded = np.zeros((C, L + 2))
    padded[:, 1:L + 1] = X
    return np.vstack([padded[:, 0:L], padded[:, 1:L + 1], padded[:, 2:L + 2]])


def fold(dU: np.ndarray, channels: int) -> np.ndarray:
    """Adjoint of `unfold`."""
    L = dU.shape[1]
    dpad = np.zeros((channels, L + 2))
    dpad[:, 0:L] += dU[0:channels]
    dpad[:, 1:L + 1] += dU[channels:2 * channels]
    dpad[:, 2:L + 2] += dU[2 * channels:3 * channels]
    return dpad[:, 1:L + 1]


@dataclass
class LayerCache:
    U: np.ndarray
    A: np.ndarray


class ConvStack:
    """Parameter naming: `<prefix>conv<i>.weight` (H x 3C) and `<prefix>conv<i>.bias` (H)."""

    def __init__(self, in_channels: int, hidden_channels: int, num_layers: int, prefix: str = ""):
        self.in_channels = in_channels
        self.hidden_channels = hidden_channels
        self.num_layers = num_layers
        self.prefix = prefix

    def layer_names(self, i: int) -> Tuple[str, str]:
        return f"{self.prefix}conv{i}.weight", f"{self.prefix}conv{i}.bias"

    def layer_inputs(self, i: int) -> int:
        return self.in_channels if i == 0 else self.hidden_channels

    def init_params(self, rng: np.random.Generator, scale: float) -> Dict[str, np.ndarray]:
        params = {}
        for i in range(self.num_layers):
            w_name, b_name = self.layer_names(i)
            params[w_name] = rng.normal(0.0, scale, (self.hidden_channels, KERNEL * self.layer_inputs(i)))
            params[b_name] = np.zeros(self.hidden_channels)
        return params

    def forward(self, X: np.ndarray, params: Dict[str, np.ndarray]) -> Tuple[np.ndarray, List[LayerCache]]:
        caches = []
        A = X
        for i in range(self.num_layers):
            w_name, b_name = self.layer_names(i)
            U = unfold(A)
            A = np.tanh(params[w_name] @ U + params[b_name][:, None])
            caches.append(LayerCache(U=U, A=A))
        return A, caches

    def backward(self, dA: np.ndarray, caches: List[LayerCache],
                 params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        """Accumulates parameter gradients into `grads`."""
        for i in reversed(range(self.num_layers)):
            w_name, b_name = self.layer_names(i)
            cache = caches[i]
            dH = dA * (1.0 - cache.A * cache.A)
            grads[w_name] += dH @ cache.U.T
            grads[b_name] += dH.sum(axis=1)
            if i > 0:
                dA = fold(params[w_name].T @ dH, self.layer_inputs(i))
