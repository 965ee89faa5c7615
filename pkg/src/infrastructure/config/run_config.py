# src/infrastructure/config/run_config.py
"""Flat JSON run configuration.

Keys are the field names of the component configs; `seed` and `output_dir`
are top level, and `seed` is copied into every component that carries one.
"""
import json
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional

from src.domain.exceptions import ValidationError
from src.domain.value_objects.configs import (
    CorpusConfig, EvaluationConfig, ModelConfig, SamplerConfig, TrainConfig,
)
from src.domain.value_objects.schedules import NoiseSchedule

logger = logging.getLogger(__name__)

SECTIONS = (
    ("corpus", CorpusConfig),
    ("schedule", NoiseSchedule),
    ("model", ModelConfig),
    ("train", TrainConfig),
    ("sampler", SamplerConfig),
    ("evaluation", EvaluationConfig),
)
TOP_LEVEL_KEYS = ("seed", "output_dir")
DEFAULT_OUTPUT_DIR = "runs"


@dataclass(frozen=True)
class RunConfig:
    corpus: CorpusConfig
    schedule: NoiseSchedule
    model: ModelConfig
    train: TrainConfig
    sampler: SamplerConfig
    evaluation: EvaluationConfig
    output_dir: str
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        """Flat echo of every setting, in the same shape the loader accepts."""
        flat: Dict[str, Any] = {}
        for name, _ in SECTIONS:
            flat.update(asdict(getattr(self, name)))
        flat.update({"seed": self.seed, "output_dir": self.output_dir})
        return flat

    def with_sampler(self, **changes: Any) -> "RunConfig":
        return replace(self, sampler=_build(SamplerConfig, {**asdict(self.sampler), **changes}))


def _build(cls, values: Dict[str, Any]):
    try:
        return cls(**values)
    except TypeError as e:
        raise ValidationError(str(e), field=cls.__name__) from e


def read_config_file(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ValidationError(f"{path} does not exist", field="config")
    try:
        with open(path, "r", encoding="utf-8") as handle:
            values = json.load(handle)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}", field="config") from e
    if not isinstance(values, dict):
        raise ValidationError(f"{path} must hold a JSON object", field="config")
    return values


def build_run_config(values: Mapping[str, Any]) -> RunConfig:
    values = dict(values)
    known = set(TOP_LEVEL_KEYS)
    for _, cls in SECTIONS:
        known.update(f.name for f in fields(cls))
    for key in values:
        if key not in known:
            raise ValidationError(f"unknown configuration key {key!r}", field=key)
    seed = values.get("seed")
    if seed is None:
        raise ValidationError("a seed is required (config file or --seed)", field="seed")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError(f"must be a nonnegative integer, got {seed!r}", field="seed")

    sections = {}
    for name, cls in SECTIONS:
        section_values = {f.name: values[f.name] for f in fields(cls) if f.name in values}
        sections[name] = _build(cls, section_values)
    return RunConfig(output_dir=str(values.get("output_dir", DEFAULT_OUTPUT_DIR)), seed=seed, **sections)


def load_run_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """File values first, then every non-None override on top."""
    values = read_config_file(path) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    config = build_run_config(values)
    logger.debug(f"Run configuration: {config.to_dict()}")
    return config
