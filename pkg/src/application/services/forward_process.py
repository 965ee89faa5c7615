# src/application/services/forward_process.py
"""Forward jump diffusion: structural corruption, spectral corruption and
single-step jump targets for predictor training."""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.spectrogram import (
    Alignment, ProtectedSet, Spectrogram, check_time, delete_column, protected_from_alignment,
)
from src.domain.exceptions import NoDeletableFrameError, ValidationError
from src.domain.value_objects.schedules import (
    DEFAULT_T_MIN, NoiseSchedule, schedule_length, vp_coefficients,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CorruptionResult:
    """Structurally corrupted (but not yet noised) state."""
    x_t: Spectrogram
    mu_sub: Spectrogram
    kept: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class JumpTarget:
    x_minus_k: Spectrogram
    s_target: int
    x0_k: np.ndarray
    k: int


@dataclass(frozen=True, eq=False)
class ForwardSample:
    """Everything one pass of the forward process produces."""
    t: float
    corruption: CorruptionResult
    x_t: Spectrogram
    target: JumpTarget
    protected_positions: Tuple[int, ...]

    @property
    def mu_t(self) -> Spectrogram:
        return self.corruption.mu_sub


@dataclass(frozen=True, eq=False)
class TrainingTriplet:
    """Inputs and targets of both predictors for one corrupted utterance."""
    t: float
    x_t: Spectrogram
    mu_t: Spectrogram
    x_minus_k: Spectrogram
    mu_minus_k: Spectrogram
    s_target: int
    x0_k: np.ndarray
    k: int


def deletion_order(p: ProtectedSet, L0: int, rng: np.random.Generator) -> np.ndarray:
    """Shuffled non-protected indices; a prefix of it is a uniform random subset."""
    protected = set(p.indices)
    candidates = np.array([i for i in range(L0) if i not in protected], dtype=int)
    return rng.permutation(candidates)


def structural_corrupt(
    x0: Spectrogram,
    mu: Spectrogram,
    p: ProtectedSet,
    t: float,
    rng: np.random.Generator,
    t_min: float = DEFAULT_T_MIN,
) -> CorruptionResult:
    """Keep the protected frames plus a uniform subset of the others, L_t in total.

    The shuffle is drawn even when t <= t_min, so one seed yields nested kept
    sets across times.
    """
    t = check_time(t)
    if x0.shape != mu.shape:
        raise ValidationError(f"x0 {x0.shape} and mu {mu.shape} differ", field="mu")
    L0 = x0.L
    p.check_length(L0)
    order = deletion_order(p, L0, rng)
    if t <= t_min:
        kept = tuple(range(L0))
    else:
        L_t = schedule_length(L0, len(p), t, t_min)
        kept = tuple(sorted(set(p.indices) | set(int(i) for i in order[:L_t - len(p)])))
    return CorruptionResult(x_t=x0.select(kept), mu_sub=mu.select(kept), kept=kept)


def spectral_corrupt(
    x_sub: Spectrogram,
    mu_sub: Spectrogram,
    t: float,
    sched: NoiseSchedule,
    rng: Optional[np.random.Generator] = None,
    z: Optional[np.ndarray] = None,
) -> Spectrogram:
    """a_t x + m_t mu + sigma_t z; `z` replays a fixed noise grid instead of drawing one."""
    if x_sub.shape != mu_sub.shape:
        raise ValidationError(f"x {x_sub.shape} and mu {mu_sub.shape} differ", field="mu_sub")
    coeffs = vp_coefficients(sched, t)
    if z is None:
        if rng is None:
            raise ValidationError("either rng or z is required", field="rng")
        z = rng.standard_normal(x_sub.shape)
    elif z.shape != x_sub.shape:
        raise ValidationError(f"noise {z.shape} does not match {x_sub.shape}", field="z")
    return Spectrogram(coeffs.a_t * x_sub.data + coeffs.m_t * mu_sub.data + coeffs.sigma_t * z)


def make_jump_target(
    x_t: Spectrogram,
    x_sub: Spectrogram,
    p_kept: Sequence[int],
    rng: np.random.Generator,
) -> JumpTarget:
    """Delete one non-protected column k; its clean content comes from x_sub."""
    protected = set(int(i) for i in p_kept)
    candidates = [j for j in range(x_t.L) if j not in protected]
    if not candidates:
        raise NoDeletableFrameError(f"all {x_t.L} columns are protected")
    k = candidates[int(rng.integers(len(candidates)))]
    if k == 0:
        raise ValidationError("column 0 must be protected", field="p_kept")
    return JumpTarget(x_minus_k=delete_column(x_t, k), s_target=k, x0_k=x_sub.column(k), k=k)


def forward_sample_full(
    x0: Spectrogram,
    mu: Spectrogram,
    alignment: Alignment,
    t: float,
    sched: NoiseSchedule,
    rng: np.random.Generator,
    t_min: float = DEFAULT_T_MIN,
) -> ForwardSample:
    if alignment.num_frames != x0.L:
        raise ValidationError(
            f"alignment covers {alignment.num_frames} frames, x0 has {x0.L}", field="alignment")
    p = protected_from_alignment(alignment)
    corruption = structural_corrupt(x0, mu, p, t, rng, t_min)
    x_t = spectral_corrupt(corruption.x_t, corruption.mu_sub, t, sched, rng)
    protected = set(p.indices)
    p_kept = tuple(i for i, frame in enumerate(corruption.kept) if frame in protected)
    target = make_jump_target(x_t, corruption.x_t, p_kept, rng)
    return ForwardSample(t=float(t), corruption=corruption, x_t=x_t, target=target,
                         protected_positions=p_kept)


def forward_sample(
    x0: Spectrogram,
    mu: Spectrogram,
    alignment: Alignment,
    t: float,
    sched: NoiseSchedule,
    rng: np.random.Generator,
    t_min: float = DEFAULT_T_MIN,
) -> Tuple[Spectrogram, JumpTarget]:
    sample = forward_sample_full(x0, mu, alignment, t, sched, rng, t_min)
    return sample.x_t, sample.target


def sample_triplet(
    x0: Spectrogram,
    mu: Spectrogram,
    alignment: Alignment,
    sched: NoiseSchedule,
    rng: np.random.Generator,
    t_min: float = DEFAULT_T_MIN,
    t: Optional[float] = None,
) -> Optional[TrainingTriplet]:
    """One training triplet with t ~ U(0, 1); None when the state has nothing deletable."""
    if t is None:
        t = float(rng.uniform(0.0, 1.0))
    try:
        sample = forward_sample_full(x0, mu, alignment, t, sched, rng, t_min)
    except NoDeletableFrameError:
        logger.debug(f"no deletable frame at t={t:.3f} for length {x0.L}")
        return None
    k = sample.target.k
    return TrainingTriplet(
        t=float(t),
        x_t=sample.x_t,
        mu_t=sample.mu_t,
        x_minus_k=sample.target.x_minus_k,
        mu_minus_k=delete_column(sample.mu_t, k),
        s_target=sample.target.s_target,
        x0_k=sample.target.x0_k,
        k=k,
    )
