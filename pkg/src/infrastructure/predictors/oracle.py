# src/infrastructure/predictors/oracle.py
"""Ground-truth predictors for synthetic corpora.

Both oracles share one `OracleTracker` that follows which original frames
the reverse run has restored so far. Valid for the `tdd` and `oneshot`
samplers, where every insertion is persistent.
"""
import logging
from bisect import bisect_right
from typing import List, Optional, Sequence

import numpy as np

from src.domain.entities.spectrogram import ProtectedSet, Spectrogram
from src.domain.exceptions import UnsupportedOperationError
from src.domain.interfaces.predictors import ContentModel, LocationModel
from src.domain.value_objects.schedules import DEFAULT_T_MIN, schedule_length

EMPTY_GAP_LOGIT = -1e3


class OracleTracker:

    def __init__(
        self,
        x0: Spectrogram,
        protected: ProtectedSet,
        order: Optional[Sequence[int]] = None,
        t_min: float = DEFAULT_T_MIN,
        kept: Optional[Sequence[int]] = None,
    ):
        protected.check_length(x0.L)
        self.logger = logging.getLogger(__name__)
        self.x0 = x0
        self.protected = protected
        self.t_min = t_min
        if order is None:
            order = [i for i in range(x0.L) if i not in protected]
        self.order = tuple(int(i) for i in order)
        self.kept: List[int] = sorted(int(i) for i in (kept if kept is not None else protected.indices))

    @property
    def num_frames(self) -> int:
        return self.x0.L

    def target_frames(self, t: float) -> set:
        L_t = schedule_length(self.num_frames, len(self.protected), t, self.t_min)
        return set(self.protected.indices) | set(self.order[:L_t - len(self.protected)])

    def missing(self, t: float) -> List[int]:
        """Frames due at time t that are not restored yet; every absent frame once those are done."""
        kept = set(self.kept)
        due = self.target_frames(t) - kept
        if not due:
            due = set(range(self.num_frames)) - kept
        return sorted(due)

    def gap_counts(self, t: float) -> np.ndarray:
        """Missing frames per gap; gap j lies right of kept[j] and maps to slot j + 1."""
        counts = np.zeros(len(self.kept), dtype=int)
        for frame in self.missing(t):
            counts[bisect_right(self.kept, frame) - 1] += 1
        return counts

    def restore(self, s: int, t: float) -> np.ndarray:
        """Record the frame restored at slot s and return its clean column.

        Slots filled several times in one step receive frames right to left, so
        the largest missing frame of the gap goes first. A gap with nothing left
        to restore gets a copy of its left neighbour.
        """
        left = self.kept[s - 1]
        right = self.kept[s] if s < len(self.kept) else self.num_frames
        candidates = [f for f in self.missing(t) if left < f < right]
        frame = max(candidates) if candidates else left
        if not candidates:
            self.logger.debug(f"slot {s} at t={t:.3f} has no missing frame, duplicating {left}")
        self.kept.insert(s, frame)
        return self.x0.column(frame)


class OracleLocationModel(LocationModel):

    def __init__(self, tracker: Optional[OracleTracker] = None):
        self.tracker = tracker

    def score_slots(self, x_t: Spectrogram, mu_t: Spectrogram, t: float) -> np.ndarray:
        if self.tracker is None:
            raise UnsupportedOperationError("oracle location model has no ground truth")
        if x_t.L != len(self.tracker.kept):
            raise UnsupportedOperationError(
                f"state length {x_t.L} does not match {len(self.tracker.kept)} tracked frames")
        counts = self.tracker.gap_counts(t)
        logits = np.full(counts.shape[0], EMPTY_GAP_LOGIT)
        nonempty = counts > 0
        logits[nonempty] = np.log(counts[nonempty])
        return logits


class OracleContentModel(ContentModel):

    def __init__(self, tracker: Optional[OracleTracker] = None):
        self.tracker = tracker

    def predict(self, x_masked: Spectrogram, mu_t: Spectrogram, t: float, s: int) -> np.ndarray:
        if self.tracker is None:
            raise UnsupportedOperationError("oracle content model has no ground truth")
        if x_masked.L != len(self.tracker.kept) + 1:
            raise UnsupportedOperationError(
                f"masked length {x_masked.L} does not follow {len(self.tracker.kept)} tracked frames")
        return self.tracker.restore(s, t)
