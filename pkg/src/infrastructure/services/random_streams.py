# src/infrastructure/services/random_streams.py
"""Named random streams derived from a single run seed."""
import hashlib
from typing import Tuple

import numpy as np

from src.domain.exceptions import ValidationError

STREAM_NAMES: Tuple[str, ...] = ("corpus", "train", "synth", "eval", "corrupt")


class RandomStreams:
    """Every stage draws from its own stream, so changing one stage never shifts another's draws."""

    def __init__(self, seed: int):
        if seed is None or int(seed) < 0:
            raise ValidationError(f"must be a nonnegative integer, got {seed}", field="seed")
        self.seed = int(seed)

    @staticmethod
    def _stream_key(name: str) -> int:
        if name not in STREAM_NAMES:
            raise ValidationError(f"unknown stream {name!r}; expected one of {STREAM_NAMES}", field="stream")
        return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:4], "little")

    def seed_sequence(self, name: str, *keys: int) -> np.random.SeedSequence:
        return np.random.SeedSequence([self.seed, self._stream_key(name), *(int(k) for k in keys)])

    def generator(self, name: str, *keys: int) -> np.random.Generator:
        """Generator for stream `name`; extra integer keys split it further (e.g. per utterance)."""
        return np.random.default_rng(self.seed_sequence(name, *keys))
