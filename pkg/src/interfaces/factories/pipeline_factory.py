# src/interfaces/factories/pipeline_factory.py
import logging

from src.application.use_cases.corrupt_utterance import CorruptUtteranceUseCase
from src.application.use_cases.evaluate_synthesis import EvaluateSynthesisUseCase
from src.application.use_cases.generate_corpus import GenerateCorpusUseCase
from src.application.use_cases.selftest import SelftestUseCase
from src.application.use_cases.synthesize_utterances import SynthesizeUtterancesUseCase
from src.application.use_cases.train_predictors import TrainPredictorsUseCase
from src.infrastructure.config.settings import Settings
from src.infrastructure.predictors.registry import MODEL_BUILDERS
from src.infrastructure.repositories.local_file_repository import (
    LocalArtifactRepository, LocalCorpusRepository, LocalModelRepository,
)
from src.infrastructure.services.logging_observability_service import LoggingObservabilityService

logger = logging.getLogger(__name__)


class PipelineFactory:
    """Factory para criação dos casos de uso do pipeline, todos sobre o mesmo diretório de saída."""

    def __init__(self, output_dir, settings=None, observability_service=None):
        self.settings = settings or Settings()
        self.observability_service = observability_service or LoggingObservabilityService(self.settings)
        self.artifacts = LocalArtifactRepository(output_dir)
        self.corpus_repository = LocalCorpusRepository(self.artifacts)
        self.model_repository = LocalModelRepository(self.artifacts, MODEL_BUILDERS)
        logger.debug(f"Pipeline em {output_dir} ({self.settings.ENVIRONMENT})")

    def create_generate_corpus_use_case(self):
        return GenerateCorpusUseCase(self.corpus_repository, self.observability_service)

    def create_corrupt_use_case(self):
        return CorruptUtteranceUseCase(self.corpus_repository, self.artifacts, self.observability_service)

    def create_train_use_case(self):
        return TrainPredictorsUseCase(
            self.corpus_repository, self.model_repository, self.artifacts, self.observability_service)

    def create_synthesize_use_case(self):
        return SynthesizeUtterancesUseCase(
            self.corpus_repository, self.model_repository, self.artifacts, self.observability_service)

    def create_evaluate_use_case(self):
        return EvaluateSynthesisUseCase(self.corpus_repository, self.artifacts, self.observability_service)

    def create_selftest_use_case(self, seed=0):
        return SelftestUseCase(self.observability_service, seed)
