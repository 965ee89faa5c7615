# src/infrastructure/services/synthetic_corpus_service.py
"""Speech-like synthetic corpora with exact alignments.

Clean frames are Gaussian around their phone prototype, so the noised
marginal has a closed-form score and every oracle stays exact.
"""
import logging
from dataclasses import asdict
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.domain.entities.spectrogram import Spectrogram, upsample_prior
from src.domain.entities.utterance import Corpus, PhoneInventory, Utterance
from src.domain.value_objects.configs import CorpusConfig

SILENCE_PROTOTYPE_RANGE = 0.02
PROTOTYPE_MAGNITUDE = (0.5, 1.5)


class SyntheticCorpusService:
    """Generates inventories and utterances from a CorpusConfig."""

    def __init__(self, config: CorpusConfig):
        self.config = config
        self.logger = logging.getLogger(__name__)

    @property
    def silence_id(self) -> int:
        return self.config.num_phones

    def build_inventory(self, rng: np.random.Generator) -> PhoneInventory:
        cfg = self.config
        signs = rng.choice([-1.0, 1.0], size=(cfg.num_bins, cfg.num_phones))
        magnitudes = rng.uniform(*PROTOTYPE_MAGNITUDE, size=(cfg.num_bins, cfg.num_phones))
        silence = rng.uniform(-SILENCE_PROTOTYPE_RANGE, SILENCE_PROTOTYPE_RANGE, size=(cfg.num_bins, 1))
        return PhoneInventory(
            prototypes=np.hstack([signs * magnitudes, silence]),
            silence_flags=(False,) * cfg.num_phones + (True,),
            frame_variance=cfg.frame_variance,
            silence_threshold=cfg.inventory_silence_threshold,
        )

    def _next_phone(self, previous: Optional[int], rng: np.random.Generator) -> int:
        choices = [p for p in range(self.config.num_phones) if p != previous]
        if not choices:
            return previous
        return int(choices[int(rng.integers(len(choices)))])

    def sample_phones(self, rng: np.random.Generator) -> List[int]:
        """Words of non-silent phones with optional pauses between them."""
        cfg = self.config
        target = int(rng.integers(cfg.min_phones, cfg.max_phones + 1))
        phones: List[int] = [self.silence_id] if cfg.edge_silence else []
        spoken = 0
        previous = None
        while spoken < target:
            word_length = min(int(rng.integers(cfg.word_min_phones, cfg.word_max_phones + 1)), target - spoken)
            for _ in range(word_length):
                previous = self._next_phone(previous, rng)
                phones.append(previous)
            spoken += word_length
            if spoken < target and rng.random() < cfg.silence_probability:
                phones.append(self.silence_id)
        if cfg.edge_silence:
            phones.append(self.silence_id)
        return phones

    def _draw_duration(self, modes: Tuple[float, ...], weights: np.ndarray, rng: np.random.Generator) -> int:
        mode = modes[int(rng.choice(len(modes), p=weights))]
        value = rng.normal(mode, self.config.duration_std) if self.config.duration_std > 0 else mode
        return max(1, int(round(value)))

    def sample_durations(self, phones: List[int], rng: np.random.Generator) -> List[int]:
        cfg = self.config
        weights = np.asarray(cfg.duration_weights, dtype=np.float64)
        weights = weights / weights.sum()
        silence_weights = np.full(len(cfg.silence_duration_modes), 1.0 / len(cfg.silence_duration_modes))
        return [
            self._draw_duration(cfg.silence_duration_modes, silence_weights, rng) if p == self.silence_id
            else self._draw_duration(cfg.duration_modes, weights, rng)
            for p in phones
        ]

    def generate_utterance(self, utterance_id: str, inventory: PhoneInventory, rng: np.random.Generator) -> Utterance:
        phones = self.sample_phones(rng)
        durations = self.sample_durations(phones, rng)
        mu = upsample_prior(inventory.phone_means(phones), durations)
        noise = np.sqrt(inventory.frame_variance) * rng.standard_normal(mu.shape)
        return Utterance(
            utterance_id=utterance_id,
            phones=tuple(phones),
            durations=tuple(durations),
            x0=Spectrogram(mu.data + noise),
            mu=mu,
        )

    def generate(self, rng: np.random.Generator, seed: int = 0) -> Corpus:
        inventory = self.build_inventory(rng)
        utterances = [
            self.generate_utterance(f"utt_{i:04d}", inventory, rng)
            for i in range(self.config.num_utterances)
        ]
        self.logger.info(f"Generated {len(utterances)} utterances "
                         f"({sum(u.num_frames for u in utterances)} frames)")
        return Corpus(inventory=inventory, utterances=tuple(utterances), seed=seed, config=asdict(self.config))


def gen_corpus(cfg: CorpusConfig, rng: np.random.Generator, seed: int = 0) -> Corpus:
    return SyntheticCorpusService(cfg).generate(rng, seed)


def phone_table(corpus: Corpus) -> pd.DataFrame:
    """One row per phone occurrence: utterance_id, position, phone, duration, is_silence."""
    rows = [
        {
            "utterance_id": u.utterance_id,
            "position": i,
            "phone": phone,
            "duration": duration,
            "is_silence": corpus.inventory.is_silence(phone),
        }
        for u in corpus for i, (phone, duration) in enumerate(zip(u.phones, u.durations))
    ]
    return pd.DataFrame(rows, columns=["utterance_id", "position", "phone", "duration", "is_silence"])


def corpus_statistics(corpus: Corpus) -> Dict[str, object]:
    table = phone_table(corpus)
    spoken = table[~table["is_silence"]]
    total_frames = int(table["duration"].sum())
    silent_frames = int(table.loc[table["is_silence"], "duration"].sum())
    return {
        "num_utterances": len(corpus),
        "num_phones": int(len(table)),
        "num_frames": total_frames,
        "silence_frame_fraction": silent_frames / total_frames if total_frames else 0.0,
        "mean_duration": float(spoken["duration"].mean()) if len(spoken) else 0.0,
        "duration_frequencies": spoken["duration"].value_counts(normalize=True).sort_index().to_dict(),
    }
