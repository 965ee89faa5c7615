# tests/conftest.py
import numpy as np
import pytest

from src.domain.value_objects.configs import CorpusConfig
from src.domain.value_objects.schedules import NoiseSchedule
from src.infrastructure.services.synthetic_corpus_service import gen_corpus

SMALL_CORPUS = CorpusConfig(num_bins=4, num_phones=3, num_utterances=6, min_phones=3, max_phones=5)


@pytest.fixture
def sched():
    return NoiseSchedule()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_corpus():
    """Corpus pequeno (4 bins, 3 fones) compartilhado pelos testes unitários."""
    return gen_corpus(SMALL_CORPUS, np.random.default_rng(7), seed=7)


@pytest.fixture
def utterance(small_corpus):
    return small_corpus.utterances[0]
