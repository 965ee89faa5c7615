# src/application/use_cases/evaluate_synthesis.py
import logging
import os
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from src.application.services.evaluation import (
    dtw_path, marginal_check, max_vertical_run, path_linearity, silence_ratio,
    silence_threshold_from_corpus, wasserstein1,
)
from src.domain.entities.spectrogram import Spectrogram
from src.domain.exceptions import ValidationError
from src.domain.interfaces.repositories import ArtifactRepository, CorpusRepository
from src.domain.interfaces.services import ObservabilityService
from src.infrastructure.config.output_layout import OutputLayout
from src.infrastructure.config.run_config import RunConfig
from src.infrastructure.services.random_streams import RandomStreams

METRIC_COLUMNS = ["utterance_id", "metric", "value"]
POOLED_ID = "ALL"
MARGINAL_FRAMES = 4


def compare_systems(
    references: Mapping[str, Spectrogram],
    syntheses: Mapping[str, Spectrogram],
    threshold: float,
    durations: Optional[Mapping[str, Sequence[int]]] = None,
    reference_durations: Optional[Mapping[str, Sequence[int]]] = None,
    heatmaps: Optional[Dict[str, np.ndarray]] = None,
) -> pd.DataFrame:
    """Long-format metric rows for every synthesized utterance with a reference.

    When both duration maps are given, a pooled duration_w1 row is appended.
    Accumulated DTW cost grids are stored into `heatmaps` when a dict is passed.
    """
    rows: List[dict] = []
    for utterance_id in sorted(syntheses):
        if utterance_id not in references:
            raise ValidationError(f"no reference for {utterance_id}", field="references")
        x, ref = syntheses[utterance_id], references[utterance_id]
        result = dtw_path(ref, x)
        if heatmaps is not None:
            heatmaps[utterance_id] = result.accumulated
        metrics = {
            "length": float(x.L),
            "silence_ratio": silence_ratio(x, threshold).ratio,
            "reference_silence_ratio": silence_ratio(ref, threshold).ratio,
            "dtw_cost": result.cost,
            "dtw_r2": path_linearity(result),
            "max_vertical_run": float(max_vertical_run(result)),
        }
        rows.extend({"utterance_id": utterance_id, "metric": name, "value": value} for name, value in metrics.items())
    if durations and reference_durations:
        sampled = [d for utterance_id in sorted(durations) for d in durations[utterance_id]]
        truth = [d for utterance_id in sorted(reference_durations) for d in reference_durations[utterance_id]]
        rows.append({"utterance_id": POOLED_ID, "metric": "duration_w1", "value": wasserstein1(sampled, truth)})
    return pd.DataFrame(rows, columns=METRIC_COLUMNS)


def summarize(metrics: pd.DataFrame) -> Dict[str, float]:
    """Mean of every metric across utterances."""
    if metrics.empty:
        return {}
    return {name: float(value) for name, value in metrics.groupby("metric")["value"].mean().items()}


class EvaluateSynthesisUseCase:
    """Scores one synthesis run against ground truth or another run."""

    def __init__(self, corpus_repository: CorpusRepository, artifact_repository: ArtifactRepository,
                 observability_service: ObservabilityService):
        self.logger = logging.getLogger(__name__)
        self.corpus_repository = corpus_repository
        self.artifact_repository = artifact_repository
        self.observability_service = observability_service

    def _load_run(self, tag: str) -> Dict[str, Spectrogram]:
        files = self.artifact_repository.list_files(OutputLayout.synth_dir(tag), ".jdsp")
        if not files:
            raise ValidationError(f"no synthesized spectrograms under {OutputLayout.synth_dir(tag)}", field="run")
        return {os.path.basename(f)[:-len(".jdsp")]: self.artifact_repository.load_spectrogram(f) for f in files}

    def _load_durations(self, tag: str, utterance_ids: Sequence[str]) -> Dict[str, List[int]]:
        durations = {}
        for utterance_id in utterance_ids:
            trace = self.artifact_repository.load_json(OutputLayout.synth_path(tag, utterance_id, "json"))
            if trace.get("durations"):
                durations[utterance_id] = trace["durations"]
        return durations

    def _marginal_rows(self, config: RunConfig, x0: Spectrogram, mu: Spectrogram) -> List[dict]:
        rng = RandomStreams(config.seed).generator("eval")
        frames = list(range(min(MARGINAL_FRAMES, x0.L)))
        rows = []
        for t in config.evaluation.marginal_times:
            report = marginal_check(x0.select(frames), mu.select(frames), t, config.schedule,
                                    config.evaluation.marginal_draws, rng)
            rows.extend([
                {"utterance_id": "marginal", "metric": f"mean_deviation_se_t{t:g}", "value": report.max_mean_deviation},
                {"utterance_id": "marginal", "metric": f"variance_ratio_t{t:g}", "value": report.variance_ratio},
                {"utterance_id": "marginal", "metric": f"passed_t{t:g}", "value": float(report.passed())},
            ])
        return rows

    def execute(self, config: RunConfig, tag: str, reference_tag: Optional[str] = None,
                heatmaps: Optional[bool] = None, run_marginal_check: bool = False) -> pd.DataFrame:
        try:
            self.observability_service.log_event(
                "evaluate_started", {"tag": tag, "reference": reference_tag or "ground_truth"})
            corpus = self.corpus_repository.load_corpus()
            syntheses = self._load_run(tag)
            if reference_tag:
                references = self._load_run(reference_tag)
            else:
                references = {u.utterance_id: u.x0 for u in corpus}

            threshold = config.evaluation.silence_threshold
            if threshold is None:
                threshold = silence_threshold_from_corpus(
                    [u.x0 for u in corpus], config.evaluation.silence_percentile)
            truth = {u.utterance_id: list(u.durations) for u in corpus if u.utterance_id in syntheses}
            grids: Optional[Dict[str, np.ndarray]] = {} if (heatmaps or config.evaluation.heatmaps) else None

            metrics = compare_systems(references, syntheses, threshold,
                                      self._load_durations(tag, sorted(syntheses)), truth, grids)
            if run_marginal_check:
                first = corpus.utterances[0]
                metrics = pd.concat([metrics, pd.DataFrame(self._marginal_rows(config, first.x0, first.mu),
                                                           columns=METRIC_COLUMNS)], ignore_index=True)
            for utterance_id, grid in (grids or {}).items():
                self.artifact_repository.save_image(OutputLayout.eval_path(tag, f"{utterance_id}_dtw.pgm"), grid)

            summary = {"tag": tag, "reference": reference_tag or "ground_truth",
                       "silence_threshold": float(threshold), "means": summarize(metrics)}
            self.artifact_repository.save_table(OutputLayout.eval_path(tag, "metrics.csv"), metrics)
            self.artifact_repository.save_json(OutputLayout.eval_path(tag, "summary.json"), summary)

            for name, value in summary["means"].items():
                self.observability_service.track_metric(name, value, {"tag": tag})
            self.observability_service.log_event("evaluate_completed", {"tag": tag, "rows": len(metrics)})
            return metrics

        except Exception as e:
            self.logger.error(f"Error evaluating {tag}: {str(e)}")
            self.observability_service.log_event("evaluate_failed", {"tag": tag, "error": str(e)})
            raise
