# src/application/use_cases/synthesize_utterances.py
import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.application.services.reverse_process import AnalyticScore, baseline_synthesize, synthesize
from src.domain.entities.spectrogram import Spectrogram, protected_from_alignment
from src.domain.entities.utterance import Corpus, Utterance
from src.domain.exceptions import ValidationError
from src.domain.interfaces.predictors import ContentModel, LocationModel
from src.domain.interfaces.repositories import ArtifactRepository, CorpusRepository, ModelRepository
from src.domain.interfaces.services import ObservabilityService
from src.application.use_cases.train_predictors import CONTENT_MODEL, LOCATION_MODEL, REGRESSION_MODEL
from src.infrastructure.config.output_layout import OutputLayout
from src.infrastructure.config.run_config import RunConfig
from src.infrastructure.predictors.heuristics import PriorContentModel, UniformLocationModel
from src.infrastructure.predictors.oracle import OracleContentModel, OracleLocationModel, OracleTracker
from src.infrastructure.predictors.regression_duration import RegressionDurationModel
from src.infrastructure.services.random_streams import RandomStreams

PREDICTOR_KINDS = ("trained", "heuristic", "oracle")


def target_length(num_frames: int, num_phones: int, speed: float) -> int:
    """L_target = round(L0 / speed), never below one frame per phone."""
    return max(num_phones, int(round(num_frames / speed)))


def default_tag(config: RunConfig, predictors: str) -> str:
    s = config.sampler
    return f"{s.mode}-{s.solver}-{s.allocation}-x{s.speed:g}-{predictors}-seed{config.seed}"


class SynthesizeUtterancesUseCase:
    """Synthesizes stored utterances with one sampler configuration."""

    def __init__(self, corpus_repository: CorpusRepository, model_repository: ModelRepository,
                 artifact_repository: ArtifactRepository, observability_service: ObservabilityService):
        self.logger = logging.getLogger(__name__)
        self.corpus_repository = corpus_repository
        self.model_repository = model_repository
        self.artifact_repository = artifact_repository
        self.observability_service = observability_service

    def _load(self, name: str):
        if not self.model_repository.has_model(name):
            raise ValidationError(f"no trained {name} model; run train first", field="predictors")
        return self.model_repository.load_model(name)

    def _regression_model(self, corpus: Corpus, predictors: str) -> RegressionDurationModel:
        if predictors == "trained":
            return self._load(REGRESSION_MODEL)
        mean = float(np.mean([d for u in corpus for d in u.durations]))
        return RegressionDurationModel(corpus.inventory.num_phone_ids, init_mean=mean)

    def _shared_models(self, config: RunConfig, corpus: Corpus, predictors: str) -> Dict[str, Any]:
        """Models reused across utterances; oracles are built per utterance instead."""
        if config.sampler.mode == "regression":
            return {"regression": self._regression_model(corpus, predictors)}
        if predictors == "trained":
            return {"loc": self._load(LOCATION_MODEL), "cont": self._load(CONTENT_MODEL)}
        if predictors == "heuristic":
            return {"loc": UniformLocationModel(), "cont": PriorContentModel()}
        return {}

    @staticmethod
    def _oracles(config: RunConfig, u: Utterance, L_target: int) -> Tuple[LocationModel, ContentModel]:
        if config.sampler.mode not in ("tdd", "oneshot") or L_target != u.num_frames:
            raise ValidationError("oracle predictors need tdd/oneshot mode at speed 1", field="predictors")
        tracker = OracleTracker(u.x0, protected_from_alignment(u.alignment), t_min=config.sampler.t_min)
        return OracleLocationModel(tracker), OracleContentModel(tracker)

    def synthesize_one(self, config: RunConfig, corpus: Corpus, u: Utterance, index: int,
                       predictors: str, rng: np.random.Generator,
                       shared: Dict[str, Any]) -> Tuple[Spectrogram, Dict[str, Any]]:
        L_target = target_length(u.num_frames, u.num_phones, config.sampler.speed)
        phone_means = u.phone_means(corpus.inventory)
        score_fn = AnalyticScore(corpus.inventory.frame_variance, config.schedule)
        if config.sampler.mode == "regression":
            x, trace = baseline_synthesize(phone_means, shared["regression"].predict(u.phones), L_target,
                                           score_fn, config.sampler, config.schedule, rng)
        else:
            if predictors == "oracle":
                loc, cont = self._oracles(config, u, L_target)
            else:
                loc, cont = shared["loc"], shared["cont"]
            x, trace = synthesize(phone_means, L_target, loc, cont, score_fn, config.sampler, config.schedule, rng)
        document = {
            "utterance_id": u.utterance_id,
            "index": index,
            "L0": u.num_frames,
            "L_target": L_target,
            "phones": list(u.phones),
            "reference_durations": list(u.durations),
            **trace.to_dict(),
        }
        return x, document

    def execute(self, config: RunConfig, predictors: str = "trained", num_utterances: Optional[int] = None,
                tag: Optional[str] = None, show_progress: bool = False) -> Dict[str, Any]:
        try:
            if predictors not in PREDICTOR_KINDS:
                raise ValidationError(f"must be one of {PREDICTOR_KINDS}", field="predictors")
            tag = tag or default_tag(config, predictors)
            self.observability_service.log_event(
                "synthesize_started", {"tag": tag, "mode": config.sampler.mode, "predictors": predictors})

            corpus = self.corpus_repository.load_corpus()
            utterances: List[Utterance] = list(corpus.utterances[:num_utterances] if num_utterances else corpus)
            streams = RandomStreams(config.seed)
            shared = self._shared_models(config, corpus, predictors)

            lengths = []
            for index, u in enumerate(tqdm(utterances, desc=f"synth {tag}", disable=not show_progress)):
                trace_id = self.observability_service.start_trace("synthesize_utterance",
                                                                  {"utterance_id": u.utterance_id})
                try:
                    x, document = self.synthesize_one(config, corpus, u, index, predictors,
                                                      streams.generator("synth", index), shared)
                except Exception as e:
                    self.observability_service.end_trace(trace_id, success=False, result_data={"error": str(e)})
                    raise
                self.observability_service.end_trace(trace_id, result_data={"utterance_id": u.utterance_id,
                                                                            "frames": x.L})
                self.artifact_repository.save_spectrogram(OutputLayout.synth_path(tag, u.utterance_id, "jdsp"), x)
                self.artifact_repository.save_json(OutputLayout.synth_path(tag, u.utterance_id, "json"), document)
                lengths.append(x.L)

            summary = {
                "tag": tag,
                "predictors": predictors,
                "utterances": [u.utterance_id for u in utterances],
                "config": config.to_dict(),
            }
            self.artifact_repository.save_json(OutputLayout.synth_path(tag, "run", "json"), summary)
            self.observability_service.track_metric("synthesized_frames", float(sum(lengths)))
            self.observability_service.log_event(
                "synthesize_completed", {"tag": tag, "num_utterances": len(utterances)})
            return summary

        except Exception as e:
            self.logger.error(f"Error synthesizing: {str(e)}")
            self.observability_service.log_event("synthesize_failed", {"error": str(e)})
            raise
