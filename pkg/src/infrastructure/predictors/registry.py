# src/infrastructure/predictors/registry.py
"""Checkpoint kind -> model constructor."""
from typing import Any, Dict

import numpy as np

from src.domain.value_objects.configs import ModelConfig
from src.infrastructure.predictors.conv_models import ConvContentModel, ConvLocationModel
from src.infrastructure.predictors.regression_duration import RegressionDurationModel


def _model_config(config: Dict[str, Any]) -> ModelConfig:
    return ModelConfig(
        hidden_channels=int(config["hidden_channels"]),
        num_layers=int(config["num_layers"]),
        init_scale=float(config["init_scale"]),
    )


def build_location(config: Dict[str, Any], params: Dict[str, np.ndarray]) -> ConvLocationModel:
    return ConvLocationModel(int(config["num_bins"]), _model_config(config), params=params)


def build_content(config: Dict[str, Any], params: Dict[str, np.ndarray]) -> ConvContentModel:
    return ConvContentModel(int(config["num_bins"]), _model_config(config), params=params,
                            lambda_prior=float(config.get("lambda_prior", 0.01)))


def build_regression(config: Dict[str, Any], params: Dict[str, np.ndarray]) -> RegressionDurationModel:
    return RegressionDurationModel(int(config["num_phone_ids"]), params=params)


MODEL_BUILDERS = {
    ConvLocationModel.kind: build_location,
    ConvContentModel.kind: build_content,
    RegressionDurationModel.kind: build_regression,
}
