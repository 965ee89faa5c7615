# src/application/services/evaluation.py
"""Alignment, silence, duration-distribution and forward-marginal metrics."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import wasserstein_distance

from src.application.services.forward_process import spectral_corrupt
from src.domain.entities.spectrogram import Spectrogram
from src.domain.exceptions import ValidationError
from src.domain.value_objects.schedules import NoiseSchedule, vp_coefficients

logger = logging.getLogger(__name__)

# traceback preference on equal accumulated cost: diagonal, vertical, horizontal
_STEPS = ((1, 1), (0, 1), (1, 0))


@dataclass(frozen=True, eq=False)
class DtwResult:
    """Monotone alignment path from (0, 0) to (Lx-1, Ly-1) with its total cost."""
    path: Tuple[Tuple[int, int], ...]
    cost: float
    accumulated: np.ndarray

    def steps(self) -> list:
        return [(b[0] - a[0], b[1] - a[1]) for a, b in zip(self.path, self.path[1:])]


def dtw_path(x: Spectrogram, y: Spectrogram) -> DtwResult:
    """Unconstrained DTW with Euclidean frame distance."""
    if x.D != y.D:
        raise ValidationError(f"bin counts {x.D} and {y.D} differ", field="y")
    if x.L == 0 or y.L == 0:
        raise ValidationError("both spectrograms must be nonempty", field="x")
    dist = cdist(x.data.T, y.data.T, metric="euclidean")
    n, m = dist.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    # cells on one anti-diagonal depend only on the two previous ones
    for d in range(2, n + m + 1):
        i = np.arange(max(1, d - m), min(n, d - 1) + 1)
        j = d - i
        acc[i, j] = dist[i - 1, j - 1] + np.minimum(np.minimum(acc[i - 1, j - 1], acc[i, j - 1]), acc[i - 1, j])

    i, j = n, m
    path = [(i - 1, j - 1)]
    while (i, j) != (1, 1):
        best, best_step = np.inf, None
        for di, dj in _STEPS:
            if i - di >= 1 and j - dj >= 1 and acc[i - di, j - dj] < best:
                best, best_step = acc[i - di, j - dj], (di, dj)
        i, j = i - best_step[0], j - best_step[1]
        path.append((i - 1, j - 1))
    path.reverse()
    return DtwResult(path=tuple(path), cost=float(acc[n, m]), accumulated=acc[1:, 1:])


def path_linearity(r: DtwResult) -> float:
    """R^2 of the least-squares line through the path; 0 for degenerate paths."""
    if len(r.path) < 2:
        raise ValidationError("path needs at least two points", field="path")
    xs = np.array([p[0] for p in r.path], dtype=np.float64)
    ys = np.array([p[1] for p in r.path], dtype=np.float64)
    dx, dy = xs - xs.mean(), ys - ys.mean()
    sxx, syy, sxy = float(dx @ dx), float(dy @ dy), float(dx @ dy)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    return float(min(1.0, max(0.0, sxy * sxy / (sxx * syy))))


def max_vertical_run(r: DtwResult) -> int:
    """Longest run of consecutive (0, 1) steps: one reference frame held against many."""
    longest = current = 0
    for step in r.steps():
        current = current + 1 if step == (0, 1) else 0
        longest = max(longest, current)
    return longest


@dataclass(frozen=True)
class SilenceReport:
    ratio: float
    total_frames: int
    silent_frames: int


def frame_energy(x: Spectrogram) -> np.ndarray:
    """Mean absolute amplitude of each frame."""
    return np.abs(x.data).mean(axis=0)


def silence_ratio(x: Spectrogram, threshold: float) -> SilenceReport:
    if x.L == 0:
        raise ValidationError("spectrogram is empty", field="x")
    silent = int(np.count_nonzero(frame_energy(x) < threshold))
    return SilenceReport(ratio=silent / x.L, total_frames=x.L, silent_frames=silent)


def silence_ratio_from_totals(total: float, silent: float) -> float:
    """Silence / Total from aggregate durations (seconds or frames)."""
    if total <= 0:
        raise ValidationError(f"must be > 0, got {total}", field="total")
    if not 0 <= silent <= total:
        raise ValidationError(f"must lie in [0, {total}], got {silent}", field="silent")
    return silent / total


def silence_threshold_from_corpus(spectrograms: Iterable[Spectrogram], percentile: float = 10.0) -> float:
    energies = [frame_energy(x) for x in spectrograms]
    if not energies:
        raise ValidationError("needs at least one reference spectrogram", field="spectrograms")
    return float(np.percentile(np.concatenate(energies), percentile))


def wasserstein1(samples_a: Sequence[float], samples_b: Sequence[float]) -> float:
    if len(samples_a) == 0 or len(samples_b) == 0:
        raise ValidationError("both sample sets must be nonempty", field="samples_a")
    return float(wasserstein_distance(np.asarray(samples_a, dtype=np.float64),
                                      np.asarray(samples_b, dtype=np.float64)))


@dataclass(frozen=True)
class MarginalReport:
    t: float
    n_draws: int
    max_mean_deviation: float
    variance_ratio: float

    def passed(self, mean_tol: float = 3.0, var_tol: float = 0.02) -> bool:
        return self.max_mean_deviation <= mean_tol and abs(self.variance_ratio - 1.0) <= var_tol


Corruptor = Callable[[Spectrogram, Spectrogram, float, NoiseSchedule, np.random.Generator], Spectrogram]


_DRAW_BLOCK_ENTRIES = 1 << 20


def _draw_moments(x_sub, mu_sub, t, sched, n_draws, rng, corruptor):
    total = np.zeros(x_sub.shape)
    total_sq = np.zeros(x_sub.shape)
    if corruptor is not None:
        for _ in range(n_draws):
            draw = corruptor(x_sub, mu_sub, t, sched, rng).data
            total += draw
            total_sq += draw * draw
        return total, total_sq
    # independent copies side by side go through the kernel in one call
    D, L = x_sub.shape
    block = max(1, _DRAW_BLOCK_ENTRIES // max(1, D * L))
    done = 0
    while done < n_draws:
        copies = min(block, n_draws - done)
        draws = spectral_corrupt(Spectrogram(np.tile(x_sub.data, (1, copies))),
                                 Spectrogram(np.tile(mu_sub.data, (1, copies))), t, sched, rng).data
        draws = draws.reshape(D, copies, L)
        total += draws.sum(axis=1)
        total_sq += (draws * draws).sum(axis=1)
        done += copies
    return total, total_sq


def marginal_check(
    x_sub: Spectrogram,
    mu_sub: Spectrogram,
    t: float,
    sched: NoiseSchedule,
    n_draws: int,
    rng: np.random.Generator,
    corruptor: Optional[Corruptor] = None,
) -> MarginalReport:
    """Monte-Carlo moments of the noising kernel against its closed form.

    Mean deviation is in standard-error units, maximized over entries; the
    variance ratio pools every entry.
    """
    if n_draws < 1000:
        raise ValidationError(f"must be >= 1000, got {n_draws}", field="n_draws")
    total, total_sq = _draw_moments(x_sub, mu_sub, t, sched, n_draws, rng, corruptor)
    mean = total / n_draws
    var = np.maximum(total_sq / n_draws - mean * mean, 0.0) * n_draws / (n_draws - 1)

    c = vp_coefficients(sched, t)
    expected = c.a_t * x_sub.data + c.m_t * mu_sub.data
    sigma2 = c.sigma_t ** 2
    if sigma2 == 0.0:
        exact = np.allclose(mean, expected, rtol=0.0, atol=1e-9)
        deviation = 0.0 if exact else math.inf
        ratio = 1.0 if float(var.max(initial=0.0)) <= 1e-12 else math.inf
    else:
        deviation = float(np.max(np.abs(mean - expected) / math.sqrt(sigma2 / n_draws)))
        ratio = float(var.mean() / sigma2)
    logger.debug(f"marginal check t={t}: deviation={deviation:.3f} SE, variance ratio={ratio:.4f}")
    return MarginalReport(t=float(t), n_draws=n_draws, max_mean_deviation=deviation, variance_ratio=ratio)
