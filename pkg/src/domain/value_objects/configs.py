# src/domain/value_objects/configs.py
from dataclasses import dataclass, field
from typing import Optional, Tuple

from src.domain.exceptions import ValidationError

SAMPLER_MODES = ("oneshot", "tdd", "udd", "regression")
SOLVERS = ("sde", "ode")
ALLOCATIONS = ("sample", "argmax")


def _require(condition: bool, field_name: str, message: str) -> None:
    if not condition:
        raise ValidationError(message, field=field_name)


@dataclass(frozen=True)
class CorpusConfig:
    """Desk-scale synthetic corpus parameters."""
    num_bins: int = 16
    num_phones: int = 8
    num_utterances: int = 200
    min_phones: int = 5
    max_phones: int = 12
    word_min_phones: int = 2
    word_max_phones: int = 4
    duration_modes: Tuple[float, ...] = (3, 9)
    duration_weights: Tuple[float, ...] = (0.5, 0.5)
    duration_std: float = 0.0
    silence_duration_modes: Tuple[float, ...] = (8, 14)
    silence_probability: float = 0.3
    edge_silence: bool = True
    frame_variance: float = 0.01
    inventory_silence_threshold: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "duration_modes", tuple(self.duration_modes))
        object.__setattr__(self, "duration_weights", tuple(self.duration_weights))
        object.__setattr__(self, "silence_duration_modes", tuple(self.silence_duration_modes))
        _require(self.num_bins >= 1, "num_bins", "must be >= 1")
        _require(self.num_phones >= 1, "num_phones", "must be >= 1")
        _require(self.num_utterances >= 1, "num_utterances", "must be >= 1")
        _require(1 <= self.min_phones <= self.max_phones, "min_phones", "need 1 <= min_phones <= max_phones")
        _require(1 <= self.word_min_phones <= self.word_max_phones, "word_min_phones",
                 "need 1 <= word_min_phones <= word_max_phones")
        _require(len(self.duration_modes) >= 1, "duration_modes", "needs at least one mode")
        _require(all(d > 0 for d in self.duration_modes), "duration_modes",
                 f"durations must be positive, got {self.duration_modes}")
        _require(len(self.duration_weights) == len(self.duration_modes), "duration_weights",
                 "one weight per duration mode")
        _require(all(w >= 0 for w in self.duration_weights) and sum(self.duration_weights) > 0,
                 "duration_weights", "weights must be nonnegative with positive sum")
        _require(self.duration_std >= 0, "duration_std", "must be >= 0")
        _require(all(d > 0 for d in self.silence_duration_modes), "silence_duration_modes",
                 f"durations must be positive, got {self.silence_duration_modes}")
        _require(0.0 <= self.silence_probability <= 1.0, "silence_probability", "must lie in [0, 1]")
        _require(self.frame_variance >= 0, "frame_variance", "must be >= 0")
        _require(self.inventory_silence_threshold > 0, "inventory_silence_threshold", "must be > 0")


@dataclass(frozen=True)
class ModelConfig:
    hidden_channels: int = 32
    num_layers: int = 1
    init_scale: float = 0.1

    def __post_init__(self):
        _require(self.hidden_channels >= 1, "hidden_channels", "must be >= 1")
        _require(self.num_layers >= 1, "num_layers", "must be >= 1")
        _require(self.init_scale > 0, "init_scale", "must be > 0")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 16
    epochs: int = 50
    lambda_prior: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        _require(self.learning_rate > 0, "learning_rate", "must be > 0")
        _require(self.batch_size >= 1, "batch_size", "must be >= 1")
        _require(self.epochs >= 0, "epochs", "must be >= 0")
        _require(self.lambda_prior >= 0, "lambda_prior", "must be >= 0")
        _require(0 <= self.adam_beta1 < 1, "adam_beta1", "must lie in [0, 1)")
        _require(0 <= self.adam_beta2 < 1, "adam_beta2", "must lie in [0, 1)")
        _require(self.adam_eps > 0, "adam_eps", "must be > 0")


@dataclass(frozen=True)
class SamplerConfig:
    """Reverse-process settings. temperature 0 means greedy (one-hot) slot logits."""
    mode: str = "udd"
    solver: str = "ode"
    steps: int = 50
    allocation: str = "sample"
    temperature: float = 1.0
    t_min: float = 0.1
    seed: int = 0
    speed: float = 1.0
    sequential_insertions: bool = False

    def __post_init__(self):
        _require(self.mode in SAMPLER_MODES, "mode", f"must be one of {SAMPLER_MODES}")
        _require(self.solver in SOLVERS, "solver", f"must be one of {SOLVERS}")
        _require(self.steps >= 1, "steps", "must be >= 1")
        _require(self.allocation in ALLOCATIONS, "allocation", f"must be one of {ALLOCATIONS}")
        _require(self.temperature >= 0, "temperature", "must be >= 0")
        _require(0 < self.t_min < 1, "t_min", "must lie in (0, 1)")
        _require(self.speed > 0, "speed", "must be > 0")

    @property
    def step_size(self) -> float:
        return 1.0 / self.steps

    def time_grid(self):
        """Uniform reverse grid 1 = t_0 > t_1 > ... > t_N = 0."""
        return [1.0 - i / self.steps for i in range(self.steps)] + [0.0]


@dataclass(frozen=True)
class EvaluationConfig:
    silence_threshold: Optional[float] = None
    silence_percentile: float = 10.0
    heatmaps: bool = False
    marginal_draws: int = 100_000
    marginal_times: Tuple[float, ...] = field(default=(0.25, 0.5, 0.75))

    def __post_init__(self):
        object.__setattr__(self, "marginal_times", tuple(self.marginal_times))
        _require(self.silence_threshold is None or self.silence_threshold > 0,
                 "silence_threshold", "must be > 0")
        _require(0 <= self.silence_percentile <= 100, "silence_percentile", "must lie in [0, 100]")
        _require(self.marginal_draws >= 1000, "marginal_draws", "must be >= 1000")
