# src/application/use_cases/corrupt_utterance.py
import logging
from typing import Any, Dict

from src.application.services.forward_process import make_jump_target, spectral_corrupt, structural_corrupt
from src.domain.entities.spectrogram import check_time, protected_from_alignment
from src.domain.exceptions import NoDeletableFrameError
from src.domain.interfaces.repositories import ArtifactRepository, CorpusRepository
from src.domain.interfaces.services import ObservabilityService
from src.infrastructure.config.output_layout import OutputLayout
from src.infrastructure.config.run_config import RunConfig
from src.infrastructure.services.random_streams import RandomStreams


class CorruptUtteranceUseCase:
    """Runs the forward process once on a stored utterance and writes what it produced."""

    def __init__(self, corpus_repository: CorpusRepository, artifact_repository: ArtifactRepository,
                 observability_service: ObservabilityService):
        self.logger = logging.getLogger(__name__)
        self.corpus_repository = corpus_repository
        self.artifact_repository = artifact_repository
        self.observability_service = observability_service

    def execute(self, config: RunConfig, utterance_id: str, t: float) -> Dict[str, Any]:
        try:
            t = check_time(t)
            self.observability_service.log_event("corrupt_started", {"utterance_id": utterance_id, "t": t})

            corpus = self.corpus_repository.load_corpus()
            u = corpus.get(utterance_id)
            rng = RandomStreams(config.seed).generator("corrupt")
            p = protected_from_alignment(u.alignment)
            corruption = structural_corrupt(u.x0, u.mu, p, t, rng, config.sampler.t_min)
            x_t = spectral_corrupt(corruption.x_t, corruption.mu_sub, t, config.schedule, rng)
            protected = set(p.indices)
            p_kept = [i for i, frame in enumerate(corruption.kept) if frame in protected]

            sidecar: Dict[str, Any] = {
                "utterance_id": utterance_id,
                "t": t,
                "L0": u.num_frames,
                "L_t": x_t.L,
                "kept": list(corruption.kept),
                "protected_positions": p_kept,
                "s_target": None,
                "k": None,
            }
            self.artifact_repository.save_spectrogram(OutputLayout.corrupt_path(utterance_id, t, "jdsp"), x_t)
            self.artifact_repository.save_image(OutputLayout.corrupt_path(utterance_id, t, "pgm"), x_t.data)
            try:
                target = make_jump_target(x_t, corruption.x_t, p_kept, rng)
                sidecar.update({"s_target": target.s_target, "k": target.k,
                                "x0_k": [float(v) for v in target.x0_k]})
                self.artifact_repository.save_spectrogram(
                    OutputLayout.corrupt_path(utterance_id, t, "minus_k.jdsp"), target.x_minus_k)
            except NoDeletableFrameError:
                self.logger.warning(f"{utterance_id} at t={t}: every kept frame is protected")
            self.artifact_repository.save_json(OutputLayout.corrupt_path(utterance_id, t, "json"), sidecar)

            self.observability_service.log_event(
                "corrupt_completed", {"utterance_id": utterance_id, "L_t": x_t.L, "s_target": sidecar["s_target"]})
            return sidecar

        except Exception as e:
            self.logger.error(f"Error corrupting {utterance_id}: {str(e)}")
            self.observability_service.log_event("corrupt_failed", {"utterance_id": utterance_id, "error": str(e)})
            raise
