# src/domain/interfaces/repositories.py
from abc import ABC, abstractmethod
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from src.domain.entities.spectrogram import Spectrogram
from src.domain.entities.utterance import Corpus
from src.domain.interfaces.predictors import TrainableModel


class CorpusRepository(ABC):
    """Interface for persisting synthetic corpora."""

    @abstractmethod
    def save_corpus(self, corpus: Corpus) -> str:
        """Save a corpus and return the manifest location."""
        pass

    @abstractmethod
    def load_corpus(self) -> Corpus:
        """Load the corpus saved under this repository."""
        pass


class ArtifactRepository(ABC):
    """Interface for run artifacts: spectrograms, JSON documents, tables and images."""

    @abstractmethod
    def save_spectrogram(self, relative_path: str, x: Spectrogram) -> str:
        pass

    @abstractmethod
    def load_spectrogram(self, relative_path: str) -> Spectrogram:
        pass

    @abstractmethod
    def save_json(self, relative_path: str, document: Dict[str, Any]) -> str:
        pass

    @abstractmethod
    def load_json(self, relative_path: str) -> Dict[str, Any]:
        pass

    @abstractmethod
    def save_table(self, relative_path: str, table: pd.DataFrame) -> str:
        pass

    @abstractmethod
    def load_table(self, relative_path: str) -> pd.DataFrame:
        pass

    @abstractmethod
    def save_image(self, relative_path: str, grid: np.ndarray) -> str:
        pass

    @abstractmethod
    def exists(self, relative_path: str) -> bool:
        pass

    @abstractmethod
    def list_files(self, relative_dir: str, suffix: str) -> List[str]:
        pass


class ModelRepository(ABC):
    """Interface for model checkpoints."""

    @abstractmethod
    def save_model(self, name: str, model: TrainableModel) -> str:
        pass

    @abstractmethod
    def load_model(self, name: str) -> TrainableModel:
        pass

    @abstractmethod
    def has_model(self, name: str) -> bool:
        pass
