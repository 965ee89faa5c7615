# src/application/use_cases/train_predictors.py
import logging
from datetime import datetime

from src.application.services.training import TrainingReport, train
from src.domain.interfaces.repositories import ArtifactRepository, CorpusRepository, ModelRepository
from src.domain.interfaces.services import ObservabilityService
from src.infrastructure.config.output_layout import OutputLayout
from src.infrastructure.config.run_config import RunConfig
from src.infrastructure.predictors.conv_models import ConvContentModel, ConvLocationModel
from src.infrastructure.predictors.regression_duration import regression_duration_baseline
from src.infrastructure.services.random_streams import RandomStreams

LOCATION_MODEL = "location"
CONTENT_MODEL = "content"
REGRESSION_MODEL = "regression"


class TrainPredictorsUseCase:
    """Trains the location/content predictors and the regression duration baseline."""

    def __init__(self, corpus_repository: CorpusRepository, model_repository: ModelRepository,
                 artifact_repository: ArtifactRepository, observability_service: ObservabilityService):
        self.logger = logging.getLogger(__name__)
        self.corpus_repository = corpus_repository
        self.model_repository = model_repository
        self.artifact_repository = artifact_repository
        self.observability_service = observability_service

    def execute(self, config: RunConfig, show_progress: bool = False) -> TrainingReport:
        try:
            self.observability_service.log_event(
                "train_started",
                {"epochs": config.train.epochs, "learning_rate": config.train.learning_rate}
            )
            corpus = self.corpus_repository.load_corpus()
            streams = RandomStreams(config.seed)
            rng = streams.generator("train")
            num_bins = corpus.inventory.num_bins
            loc = ConvLocationModel(num_bins, config.model, rng)
            cont = ConvContentModel(num_bins, config.model, rng, lambda_prior=config.train.lambda_prior)

            start_time = datetime.now()
            report = train(corpus.utterances, loc, cont, config.train, config.schedule, rng,
                           config.sampler.t_min, show_progress)
            regression = regression_duration_baseline(
                corpus.utterances, config.train, corpus.inventory.num_phone_ids, streams.generator("train", 1))
            training_time = (datetime.now() - start_time).total_seconds()

            self.model_repository.save_model(LOCATION_MODEL, loc)
            self.model_repository.save_model(CONTENT_MODEL, cont)
            self.model_repository.save_model(REGRESSION_MODEL, regression)
            self.artifact_repository.save_table(OutputLayout.training_report(), report.to_frame())

            self.observability_service.track_metric("training_time_seconds", training_time)
            final = report.epochs[-1] if len(report) else {}
            self.observability_service.log_event(
                "train_completed", {"epochs_run": len(report), **final})
            return report

        except Exception as e:
            self.logger.error(f"Error training predictors: {str(e)}")
            self.observability_service.log_event("train_failed", {"error": str(e)})
            raise
