# src/domain/entities/utterance.py
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.domain.entities.spectrogram import Alignment, Spectrogram, upsample_prior
from src.domain.exceptions import ValidationError


@dataclass(frozen=True, eq=False)
class PhoneInventory:
    """Phone prototypes (D x num_phone_ids), silence flags and frame jitter variance."""
    prototypes: np.ndarray
    silence_flags: Tuple[bool, ...]
    frame_variance: float
    silence_threshold: float

    def __post_init__(self):
        protos = np.array(self.prototypes, dtype=np.float64)
        if protos.ndim != 2 or protos.shape[1] != len(self.silence_flags):
            raise ValidationError(
                f"prototype grid {protos.shape} does not match {len(self.silence_flags)} flags",
                field="prototypes")
        if all(self.silence_flags):
            raise ValidationError("at least one phone must be non-silent", field="silence_flags")
        if self.frame_variance < 0:
            raise ValidationError("must be >= 0", field="frame_variance")
        protos.flags.writeable = False
        object.__setattr__(self, "prototypes", protos)
        object.__setattr__(self, "silence_flags", tuple(bool(f) for f in self.silence_flags))

    @property
    def num_bins(self) -> int:
        return self.prototypes.shape[0]

    @property
    def num_phone_ids(self) -> int:
        return self.prototypes.shape[1]

    def is_silence(self, phone_id: int) -> bool:
        return self.silence_flags[phone_id]

    def phone_means(self, phones) -> np.ndarray:
        """Non-upsampled prior: one prototype column per phone in `phones`."""
        return self.prototypes[:, np.asarray(phones, dtype=int)]


@dataclass(frozen=True, eq=False)
class Utterance:
    """One synthetic utterance with its ground truth."""
    utterance_id: str
    phones: Tuple[int, ...]
    durations: Tuple[int, ...]
    x0: Spectrogram
    mu: Spectrogram

    def __post_init__(self):
        if len(self.phones) != len(self.durations):
            raise ValidationError("phones and durations differ in length", field="durations")
        total = int(sum(self.durations))
        if self.x0.L != total or self.mu.L != total:
            raise ValidationError(
                f"x0/mu lengths {self.x0.L}/{self.mu.L} do not match duration sum {total}",
                field="durations")

    @property
    def alignment(self) -> Alignment:
        return Alignment.from_durations(self.phones, self.durations)

    @property
    def num_frames(self) -> int:
        return self.x0.L

    @property
    def num_phones(self) -> int:
        return len(self.phones)

    def phone_means(self, inventory: PhoneInventory) -> np.ndarray:
        return inventory.phone_means(self.phones)

    def check_prior(self, inventory: PhoneInventory) -> bool:
        """True when mu equals the upsampled prototypes."""
        return upsample_prior(self.phone_means(inventory), self.durations).bit_equal(self.mu)


def duration_ground_truth(u: Utterance) -> Tuple[int, ...]:
    return tuple(int(d) for d in u.durations)


@dataclass(frozen=True, eq=False)
class Corpus:
    """A generated corpus: inventory, utterances and the settings that produced it."""
    inventory: PhoneInventory
    utterances: Tuple[Utterance, ...]
    seed: int
    config: dict

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        for u in self.utterances:
            if u.x0.D != self.inventory.num_bins:
                raise ValidationError(
                    f"{u.utterance_id} has {u.x0.D} bins, inventory has {self.inventory.num_bins}",
                    field="utterances")

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances)

    def get(self, utterance_id: str) -> Utterance:
        for u in self.utterances:
            if u.utterance_id == utterance_id:
                return u
        raise ValidationError(f"unknown utterance {utterance_id!r}", field="utterance")
