# src/domain/entities/spectrogram.py
"""Variable-length spectrogram states and the index-safe edits applied to them.

All values are immutable: every edit returns a new object and leaves its
input untouched, so states can be replayed and shared freely.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from src.domain.exceptions import ValidationError

# Diffusion time is a plain float in [0, 1]; `check_time` validates it.
DiffusionTime = float

FrameColumn = np.ndarray


def check_time(t: float, name: str = "t") -> float:
    """Validate a diffusion time and return it as float."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"must lie in [0, 1], got {t}", field=name)
    return t


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Dense D x L real grid (frequency bins x time frames)."""
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"expected a 2-D grid, got shape {arr.shape}", field="data")
        if arr.shape[0] < 1:
            raise ValidationError("needs at least one frequency bin", field="data")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("contains non-finite entries", field="data")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def zeros(cls, num_bins: int, num_frames: int) -> "Spectrogram":
        return cls(np.zeros((num_bins, num_frames)))

    @classmethod
    def empty(cls, num_bins: int) -> "Spectrogram":
        return cls(np.zeros((num_bins, 0)))

    @property
    def D(self) -> int:
        return self.data.shape[0]

    @property
    def L(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def __len__(self) -> int:
        return self.L

    def column(self, j: int) -> FrameColumn:
        if not 0 <= j < self.L:
            raise IndexError(f"column {j} out of range for length {self.L}")
        return self.data[:, j].copy()

    def select(self, indices: Sequence[int]) -> "Spectrogram":
        """Columns at `indices`, in the given order."""
        return Spectrogram(self.data[:, np.asarray(indices, dtype=int)])

    def with_column(self, j: int, col: FrameColumn) -> "Spectrogram":
        if not 0 <= j < self.L:
            raise IndexError(f"column {j} out of range for length {self.L}")
        arr = self.data.copy()
        arr[:, j] = _as_column(col, self.D)
        return Spectrogram(arr)

    def bit_equal(self, other: "Spectrogram") -> bool:
        return self.shape == other.shape and np.array_equal(self.data, other.data)


@dataclass(frozen=True)
class Alignment:
    """Phone to frame mapping: per-phone (start, length) spans covering [0, L0)."""
    phones: Tuple[int, ...]
    spans: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        phones = tuple(int(p) for p in self.phones)
        spans = tuple((int(s), int(n)) for s, n in self.spans)
        if not phones:
            raise ValidationError("needs at least one phone", field="phones")
        if len(phones) != len(spans):
            raise ValidationError(
                f"{len(phones)} phones but {len(spans)} spans", field="spans")
        expected_start = 0
        for i, (start, length) in enumerate(spans):
            if length < 1:
                raise ValidationError(f"span {i} has length {length} < 1", field="spans")
            if start != expected_start:
                raise ValidationError(
                    f"span {i} starts at {start}, expected {expected_start}", field="spans")
            expected_start = start + length
        object.__setattr__(self, "phones", phones)
        object.__setattr__(self, "spans", spans)

    @classmethod
    def from_durations(cls, phones: Sequence[int], durations: Sequence[int]) -> "Alignment":
        durations = [int(d) for d in durations]
        starts = np.concatenate(([0], np.cumsum(durations)[:-1])).astype(int) if durations else []
        return cls(tuple(phones), tuple(zip(starts, durations)))

    @property
    def num_phones(self) -> int:
        return len(self.phones)

    @property
    def num_frames(self) -> int:
        start, length = self.spans[-1]
        return start + length

    @property
    def durations(self) -> Tuple[int, ...]:
        return tuple(length for _, length in self.spans)

    def phone_of_frame(self) -> np.ndarray:
        """Phone position (0..N_phone-1) covering each frame."""
        return np.repeat(np.arange(self.num_phones), self.durations)


@dataclass(frozen=True)
class ProtectedSet:
    """Frame indices that structural corruption may never delete."""
    indices: Tuple[int, ...]

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if not indices or indices[0] != 0:
            raise ValidationError("must contain frame 0", field="indices")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValidationError("indices must be strictly increasing", field="indices")
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, item: int) -> bool:
        return int(item) in self.indices

    def check_length(self, num_frames: int) -> None:
        if self.indices[-1] >= num_frames:
            raise ValidationError(
                f"protected index {self.indices[-1]} outside length {num_frames}", field="indices")


class FrameOrigin(str, Enum):
    ORIGINAL = "original"
    INSERTED = "inserted"


@dataclass(frozen=True)
class ProvenanceMask:
    """Per-column original/inserted labels travelling with a Spectrogram."""
    flags: Tuple[FrameOrigin, ...]

    @classmethod
    def all_original(cls, length: int) -> "ProvenanceMask":
        return cls((FrameOrigin.ORIGINAL,) * length)

    def __len__(self) -> int:
        return len(self.flags)

    def insert(self, s: int, origin: FrameOrigin = FrameOrigin.INSERTED) -> "ProvenanceMask":
        if not 0 <= s <= len(self.flags):
            raise IndexError(f"slot {s} out of range for length {len(self.flags)}")
        return ProvenanceMask(self.flags[:s] + (origin,) + self.flags[s:])

    def original_indices(self) -> List[int]:
        return [i for i, f in enumerate(self.flags) if f is FrameOrigin.ORIGINAL]

    def count_original(self) -> int:
        return len(self.original_indices())

    def promote_all(self) -> "ProvenanceMask":
        return ProvenanceMask.all_original(len(self.flags))

    def select(self, indices: Iterable[int]) -> "ProvenanceMask":
        return ProvenanceMask(tuple(self.flags[i] for i in indices))


def _as_column(col: Union[FrameColumn, Sequence[float]], num_bins: int) -> np.ndarray:
    col = np.asarray(col, dtype=np.float64).reshape(-1)
    if col.shape[0] != num_bins:
        raise ValidationError(f"column has {col.shape[0]} entries, expected {num_bins}", field="col")
    return col


def protected_from_alignment(a: Alignment) -> ProtectedSet:
    """First frame of every phone, ascending."""
    return ProtectedSet(tuple(start for start, _ in a.spans))


def delete_column(x: Spectrogram, k: int) -> Spectrogram:
    if not 0 <= k < x.L:
        raise IndexError(f"cannot delete column {k} from length {x.L}")
    return Spectrogram(np.delete(x.data, k, axis=1))


def insert_column(x: Spectrogram, col: FrameColumn, s: int) -> Spectrogram:
    """Insert `col` so that it occupies index `s`; slots are 1..L (column 0 keeps its place)."""
    if not 1 <= s <= x.L:
        raise IndexError(f"slot {s} out of range 1..{x.L}")
    return Spectrogram(np.insert(x.data, s, _as_column(col, x.D), axis=1))


def insert_columns(x: Spectrogram, cols: Sequence[FrameColumn], slots: Sequence[int]) -> Spectrogram:
    """Batch insertion with slots relative to `x`.

    Applied in descending slot order so lower slots stay valid; columns sharing
    a slot end up in the order given.
    """
    if len(cols) != len(slots):
        raise ValidationError(f"{len(cols)} columns for {len(slots)} slots", field="slots")
    for s in slots:
        if not 1 <= s <= x.L:
            raise IndexError(f"slot {s} out of range 1..{x.L}")
    order = sorted(range(len(slots)), key=lambda i: (slots[i], i), reverse=True)
    out = x
    for i in order:
        out = insert_column(out, cols[i], slots[i])
    return out


def upsample_prior(phone_means: Union[np.ndarray, Spectrogram], durations: Sequence[int]) -> Spectrogram:
    """Repeat each phone prototype `durations[i]` times (frame-level prior)."""
    means = phone_means.data if isinstance(phone_means, Spectrogram) else np.asarray(phone_means, dtype=np.float64)
    durations = np.asarray(durations, dtype=int)
    if means.ndim != 2 or means.shape[1] != durations.shape[0]:
        raise ValidationError(
            f"{means.shape} phone means for {durations.shape[0]} durations", field="durations")
    if np.any(durations < 1):
        raise ValidationError("every phone duration must be >= 1", field="durations")
    return Spectrogram(np.repeat(means, durations, axis=1))
