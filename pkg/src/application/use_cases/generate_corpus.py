# src/application/use_cases/generate_corpus.py
import logging

from src.domain.entities.utterance import Corpus
from src.domain.interfaces.repositories import CorpusRepository
from src.domain.interfaces.services import ObservabilityService
from src.infrastructure.config.run_config import RunConfig
from src.infrastructure.services.random_streams import RandomStreams
from src.infrastructure.services.synthetic_corpus_service import SyntheticCorpusService, corpus_statistics


class GenerateCorpusUseCase:
    """Use case for generating and storing a synthetic corpus."""

    def __init__(self, corpus_repository: CorpusRepository, observability_service: ObservabilityService):
        self.logger = logging.getLogger(__name__)
        self.corpus_repository = corpus_repository
        self.observability_service = observability_service

    def execute(self, config: RunConfig) -> Corpus:
        try:
            self.observability_service.log_event(
                "generate_corpus_started",
                {"seed": config.seed, "num_utterances": config.corpus.num_utterances}
            )

            rng = RandomStreams(config.seed).generator("corpus")
            corpus = SyntheticCorpusService(config.corpus).generate(rng, seed=config.seed)
            manifest_path = self.corpus_repository.save_corpus(corpus)

            stats = corpus_statistics(corpus)
            self.observability_service.track_metric("corpus_frames", stats["num_frames"])
            self.observability_service.track_metric("silence_frame_fraction", stats["silence_frame_fraction"])
            self.observability_service.log_event(
                "generate_corpus_completed",
                {"manifest": manifest_path, "num_utterances": len(corpus), "num_frames": stats["num_frames"]}
            )
            return corpus

        except Exception as e:
            self.logger.error(f"Error generating corpus: {str(e)}")
            self.observability_service.log_event("generate_corpus_failed", {"error": str(e)})
            raise
