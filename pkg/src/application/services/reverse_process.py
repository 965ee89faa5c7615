# src/application/services/reverse_process.py
"""Reverse jump diffusion: interleaved insertion jumps and denoising steps.

Modes: `tdd` denoises the variable-length state directly, `udd` pads it to
the target length around every denoising step, `oneshot` performs every
insertion at t = 1, and `regression` is the fixed-length baseline driven by
stretched regression durations.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.application.services.losses import slot_probabilities
from src.domain.entities.spectrogram import (
    FrameOrigin, ProvenanceMask, Spectrogram, insert_column, upsample_prior,
)
from src.domain.exceptions import ValidationError
from src.domain.interfaces.predictors import ContentModel, LocationModel, ScoreFunction
from src.domain.value_objects.configs import SamplerConfig
from src.domain.value_objects.schedules import (
    KernelCoeffs, NoiseSchedule, schedule_length, vp_coefficients,
)

logger = logging.getLogger(__name__)

StepCallback = Callable[[Dict[str, Any], "ReverseState"], None]


@dataclass(frozen=True, eq=False)
class ReverseState:
    """Persistent reverse-process state; phone_index maps every column to its phone."""
    x: Spectrogram
    mu: Spectrogram
    provenance: ProvenanceMask
    phone_index: Tuple[int, ...]

    def __post_init__(self):
        n = self.x.L
        if self.mu.L != n or len(self.provenance) != n or len(self.phone_index) != n:
            raise ValidationError(
                f"lengths x={n} mu={self.mu.L} provenance={len(self.provenance)} "
                f"phones={len(self.phone_index)} differ", field="x")

    @classmethod
    def initial(cls, phone_means: np.ndarray, rng: np.random.Generator) -> "ReverseState":
        """x_1 = mu_tilde + z on the compressed phone-level state."""
        mu = Spectrogram(phone_means)
        x = Spectrogram(mu.data + rng.standard_normal(mu.shape))
        return cls(x, mu, ProvenanceMask.all_original(mu.L), tuple(range(mu.L)))

    @property
    def length(self) -> int:
        return self.x.L

    def with_x(self, x: Spectrogram) -> "ReverseState":
        return ReverseState(x, self.mu, self.provenance, self.phone_index)

    def keep(self, indices: Sequence[int]) -> "ReverseState":
        indices = list(indices)
        return ReverseState(self.x.select(indices), self.mu.select(indices),
                            self.provenance.select(indices),
                            tuple(self.phone_index[i] for i in indices))

    def promoted(self) -> "ReverseState":
        return ReverseState(self.x, self.mu, self.provenance.promote_all(), self.phone_index)

    def durations(self, num_phones: Optional[int] = None) -> np.ndarray:
        minlength = num_phones if num_phones is not None else (max(self.phone_index) + 1)
        return np.bincount(np.asarray(self.phone_index, dtype=int), minlength=minlength)


@dataclass
class SynthesisTrace:
    mode: str
    steps: List[Dict[str, Any]] = field(default_factory=list)
    durations: List[int] = field(default_factory=list)

    def record(self, **entry: Any) -> Dict[str, Any]:
        self.steps.append(entry)
        return entry

    def lengths(self) -> List[int]:
        return [step["length"] for step in self.steps]

    def to_dict(self) -> Dict[str, Any]:
        return {"mode": self.mode, "steps": self.steps, "durations": self.durations}


class AnalyticScore(ScoreFunction):
    """Exact score when clean frames are N(mu_col, v I): the noised marginal stays centred on mu."""

    def __init__(self, data_variance: float, sched: NoiseSchedule):
        if data_variance < 0:
            raise ValidationError(f"must be >= 0, got {data_variance}", field="data_variance")
        self.data_variance = float(data_variance)
        self.sched = sched

    def score(self, x: Spectrogram, mu: Spectrogram, t: float) -> np.ndarray:
        c = vp_coefficients(self.sched, t)
        variance = c.a_t ** 2 * self.data_variance + c.sigma_t ** 2
        if variance <= 0:
            raise ValidationError(f"marginal variance is {variance} at t={t}", field="data_variance")
        return -(x.data - mu.data) / variance


def analytic_score(x: Spectrogram, mu: Spectrogram, t: float, data_noise_variance: float,
                   sched: NoiseSchedule) -> np.ndarray:
    return AnalyticScore(data_noise_variance, sched).score(x, mu, t)


def denoise_step(
    x: Spectrogram,
    mu: Spectrogram,
    t: float,
    h: float,
    score_fn: ScoreFunction,
    solver: str,
    sched: NoiseSchedule,
    rng: Optional[np.random.Generator] = None,
) -> Spectrogram:
    """One reverse-time Euler step from t to t - h (probability-flow ODE or Euler-Maruyama SDE)."""
    if x.shape != mu.shape:
        raise ValidationError(f"x {x.shape} and mu {mu.shape} differ", field="mu")
    if not 0 < h <= t + 1e-12:
        raise ValidationError(f"step {h} must lie in (0, t={t}]", field="h")
    beta = sched.beta(t)
    score = score_fn.score(x, mu, t)
    drift = 0.5 * beta * (mu.data - x.data)
    if solver == "ode":
        return Spectrogram(x.data - h * (drift - 0.5 * beta * score))
    if solver == "sde":
        if rng is None:
            raise ValidationError("the SDE solver needs a random generator", field="rng")
        noise = rng.standard_normal(x.shape)
        return Spectrogram(x.data - h * (drift - beta * score) + math.sqrt(beta * h) * noise)
    raise ValidationError(f"unknown solver {solver!r}", field="solver")


def apportion(n: int, probs: np.ndarray) -> np.ndarray:
    """Largest-remainder apportionment of n units; ties go to the lower index."""
    quotas = n * np.asarray(probs, dtype=np.float64)
    counts = np.floor(quotas).astype(int)
    remainder = n - int(counts.sum())
    if remainder > 0:
        order = np.argsort(-(quotas - counts), kind="stable")
        counts[order[:remainder]] += 1
    return counts


def allocate_insertions(probs: np.ndarray, n_add: int, mode: str,
                        rng: Optional[np.random.Generator] = None) -> List[int]:
    """Slots (1..L, ascending, with repeats) for n_add insertions."""
    probs = np.asarray(probs, dtype=np.float64)
    if abs(probs.sum() - 1.0) > 1e-9 or np.any(probs < 0):
        raise ValidationError(f"not a distribution (sum {probs.sum()})", field="probs")
    if n_add < 0:
        raise ValidationError(f"must be >= 0, got {n_add}", field="n_add")
    if n_add == 0:
        return []
    if mode == "sample":
        if rng is None:
            raise ValidationError("sample allocation needs a random generator", field="rng")
        counts = np.bincount(rng.choice(probs.shape[0], size=n_add, p=probs), minlength=probs.shape[0])
    elif mode == "argmax":
        counts = apportion(n_add, probs)
    else:
        raise ValidationError(f"unknown allocation {mode!r}", field="allocation")
    return [j + 1 for j in range(probs.shape[0]) for _ in range(int(counts[j]))]


def _insert_one(state: ReverseState, s: int, t: float, cont: ContentModel,
                coeffs: KernelCoeffs, rng: np.random.Generator) -> ReverseState:
    mu_new = state.mu.column(s - 1)
    x_masked = insert_column(state.x, np.zeros(state.x.D), s)
    mu_work = insert_column(state.mu, mu_new, s)
    x0_hat = np.asarray(cont.predict(x_masked, mu_work, t, s), dtype=np.float64)
    z = rng.standard_normal(state.x.D)
    column = coeffs.a_t * x0_hat + coeffs.m_t * mu_new + coeffs.sigma_t * z
    phones = state.phone_index
    return ReverseState(
        x=x_masked.with_column(s, column),
        mu=mu_work,
        provenance=state.provenance.insert(s, FrameOrigin.INSERTED),
        phone_index=phones[:s] + (phones[s - 1],) + phones[s:],
    )


def _jump_once(state: ReverseState, t: float, n_ins: int, loc: LocationModel, cont: ContentModel,
               sched: NoiseSchedule, allocation: str, rng: np.random.Generator,
               temperature: float) -> Tuple[ReverseState, List[int]]:
    logits = np.asarray(loc.score_slots(state.x, state.mu, t), dtype=np.float64)
    if logits.shape != (state.length,) or not np.all(np.isfinite(logits)):
        raise ValidationError(
            f"location model returned {logits.shape} logits for length {state.length}", field="logits")
    slots = allocate_insertions(slot_probabilities(logits, temperature), n_ins, allocation, rng)
    coeffs = vp_coefficients(sched, t)
    for s in sorted(slots, reverse=True):
        state = _insert_one(state, s, t, cont, coeffs, rng)
    return state, slots


def jump_step(
    state: ReverseState,
    t: float,
    n_ins: int,
    loc: LocationModel,
    cont: ContentModel,
    sched: NoiseSchedule,
    allocation: str,
    rng: np.random.Generator,
    temperature: float = 1.0,
    sequential: bool = False,
) -> Tuple[ReverseState, List[int]]:
    """Insert n_ins noised columns; returns the grown state and the slots used.

    Slots come from one location query (or one per insertion when `sequential`)
    and are applied in descending order. Each new prior column duplicates its
    left neighbour.
    """
    if n_ins <= 0:
        return state, []
    if not sequential:
        return _jump_once(state, t, n_ins, loc, cont, sched, allocation, rng, temperature)
    slots: List[int] = []
    for _ in range(n_ins):
        state, used = _jump_once(state, t, 1, loc, cont, sched, allocation, rng, temperature)
        slots.extend(used)
    return state, slots


def udd_round(
    state: ReverseState,
    t: float,
    L_target: int,
    loc: LocationModel,
    cont: ContentModel,
    score_fn: ScoreFunction,
    sched: NoiseSchedule,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    h: Optional[float] = None,
) -> ReverseState:
    """Upsample to L_target, denoise the full canvas once, keep only original columns."""
    n_pad = L_target - state.length
    if n_pad < 0:
        raise ValidationError(f"state length {state.length} exceeds target {L_target}", field="L_target")
    h = cfg.step_size if h is None else h
    canvas, _ = jump_step(state, t, n_pad, loc, cont, sched, cfg.allocation, rng,
                          cfg.temperature, cfg.sequential_insertions)
    canvas = canvas.with_x(denoise_step(canvas.x, canvas.mu, t, h, score_fn, cfg.solver, sched, rng))
    return canvas.keep(canvas.provenance.original_indices())


def _check_target(phone_means: np.ndarray, L_target: int) -> int:
    num_phones = np.asarray(phone_means).shape[1]
    if L_target < num_phones:
        raise ValidationError(
            f"target length {L_target} is shorter than {num_phones} phones", field="L_target")
    return num_phones


def run_reverse(
    phone_means: np.ndarray,
    L_target: int,
    loc: LocationModel,
    cont: ContentModel,
    score_fn: ScoreFunction,
    cfg: SamplerConfig,
    sched: Optional[NoiseSchedule] = None,
    rng: Optional[np.random.Generator] = None,
    step_callback: Optional[StepCallback] = None,
) -> Tuple[ReverseState, SynthesisTrace]:
    """Full reverse sweep t: 1 -> 0 for the tdd, udd and oneshot modes."""
    num_phones = _check_target(phone_means, L_target)
    sched = sched or NoiseSchedule()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    if cfg.mode == "oneshot":
        return _run_oneshot(phone_means, L_target, loc, cont, score_fn, cfg, sched, rng, step_callback)
    if cfg.mode not in ("tdd", "udd"):
        raise ValidationError(f"mode {cfg.mode!r} is not a jump-diffusion sampler", field="mode")

    trace = SynthesisTrace(mode=cfg.mode)
    state = ReverseState.initial(phone_means, rng)
    grid, h = cfg.time_grid(), cfg.step_size
    for i in range(cfg.steps):
        t = grid[i]
        target = schedule_length(L_target, num_phones, t, cfg.t_min)
        n_grow = max(0, target - state.length)
        state, slots = jump_step(state, t, n_grow, loc, cont, sched, cfg.allocation, rng,
                                 cfg.temperature, cfg.sequential_insertions)
        entry = trace.record(step=i, t=t, length=state.length, inserted=n_grow, slots=slots)
        if step_callback is not None:
            step_callback(entry, state)
        if cfg.mode == "udd":
            state = udd_round(state.promoted(), t, L_target, loc, cont, score_fn, sched, cfg, rng, h)
        else:
            state = state.with_x(denoise_step(state.x, state.mu, t, h, score_fn, cfg.solver, sched, rng))

    if state.length < L_target:
        # grid never reached t <= t_min; finish the length with clean content
        n_final = L_target - state.length
        state, slots = jump_step(state, 0.0, n_final, loc, cont, sched, cfg.allocation, rng,
                                 cfg.temperature, cfg.sequential_insertions)
        entry = trace.record(step=cfg.steps, t=0.0, length=state.length, inserted=n_final, slots=slots)
        if step_callback is not None:
            step_callback(entry, state)
    trace.durations = state.durations(num_phones).tolist()
    return state.promoted(), trace


def _run_oneshot(phone_means, L_target, loc, cont, score_fn, cfg, sched, rng, step_callback):
    num_phones = np.asarray(phone_means).shape[1]
    trace = SynthesisTrace(mode="oneshot")
    state = ReverseState.initial(phone_means, rng)
    n_add = L_target - num_phones
    # a single location query at t = 1 places every frame
    state, slots = jump_step(state, 1.0, n_add, loc, cont, sched, cfg.allocation, rng, cfg.temperature)
    entry = trace.record(step=0, t=1.0, length=state.length, inserted=n_add, slots=slots)
    if step_callback is not None:
        step_callback(entry, state)
    grid, h = cfg.time_grid(), cfg.step_size
    for i in range(cfg.steps):
        state = state.with_x(denoise_step(state.x, state.mu, grid[i], h, score_fn, cfg.solver, sched, rng))
    trace.durations = state.durations(num_phones).tolist()
    return state.promoted(), trace


def synthesize(
    phone_means: np.ndarray,
    L_target: int,
    loc: LocationModel,
    cont: ContentModel,
    score_fn: ScoreFunction,
    cfg: SamplerConfig,
    sched: Optional[NoiseSchedule] = None,
    rng: Optional[np.random.Generator] = None,
    step_callback: Optional[StepCallback] = None,
) -> Tuple[Spectrogram, SynthesisTrace]:
    state, trace = run_reverse(phone_means, L_target, loc, cont, score_fn, cfg, sched, rng, step_callback)
    return state.x, trace


def oneshot_synthesize(
    phone_means: np.ndarray,
    L_target: int,
    loc: LocationModel,
    cont: ContentModel,
    score_fn: ScoreFunction,
    cfg: SamplerConfig,
    sched: Optional[NoiseSchedule] = None,
    rng: Optional[np.random.Generator] = None,
) -> Spectrogram:
    _check_target(phone_means, L_target)
    sched = sched or NoiseSchedule()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    state, _ = _run_oneshot(phone_means, L_target, loc, cont, score_fn, cfg, sched, rng, None)
    return state.x


def sample_durations(
    phone_means: np.ndarray,
    L_target: int,
    loc: LocationModel,
    cont: ContentModel,
    score_fn: ScoreFunction,
    cfg: SamplerConfig,
    sched: Optional[NoiseSchedule] = None,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Per-phone frame counts of one synthesis."""
    state, _ = run_reverse(phone_means, L_target, loc, cont, score_fn, cfg, sched, rng)
    return state.durations(np.asarray(phone_means).shape[1])


def stretch_durations(durations: Sequence[float], L_target: int) -> np.ndarray:
    """Uniform stretch of (possibly fractional) durations to integers summing to L_target, each >= 1."""
    durations = np.maximum(np.asarray(durations, dtype=np.float64), 1e-9)
    n = durations.shape[0]
    if L_target < n:
        raise ValidationError(f"target length {L_target} is shorter than {n} phones", field="L_target")
    counts = apportion(L_target, durations / durations.sum())
    while np.any(counts < 1):
        counts[int(np.argmax(counts))] -= 1
        counts[int(np.argmin(counts))] += 1
    return counts


def baseline_synthesize(
    phone_means: np.ndarray,
    durations: Sequence[float],
    L_target: int,
    score_fn: ScoreFunction,
    cfg: SamplerConfig,
    sched: Optional[NoiseSchedule] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Spectrogram, SynthesisTrace]:
    """Fixed-length diffusion over a prior upsampled with uniformly stretched durations."""
    num_phones = _check_target(phone_means, L_target)
    sched = sched or NoiseSchedule()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    counts = stretch_durations(durations, L_target)
    mu = upsample_prior(phone_means, counts)
    x = Spectrogram(mu.data + rng.standard_normal(mu.shape))
    grid, h = cfg.time_grid(), cfg.step_size
    for i in range(cfg.steps):
        x = denoise_step(x, mu, grid[i], h, score_fn, cfg.solver, sched, rng)
    trace = SynthesisTrace(mode="regression", durations=counts.tolist())
    trace.record(step=0, t=1.0, length=int(counts.sum()), inserted=int(counts.sum()) - num_phones, slots=[])
    return x, trace
