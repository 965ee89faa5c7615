# tests/unit/infrastructure/test_local_file_repository.py
import struct

import numpy as np
import pandas as pd
import pytest

from src.domain.entities.spectrogram import Spectrogram
from src.domain.exceptions import CorruptFileError, ValidationError
from src.domain.value_objects.configs import ModelConfig
from src.infrastructure.predictors.conv_models import ConvContentModel, ConvLocationModel
from src.infrastructure.predictors.registry import MODEL_BUILDERS
from src.infrastructure.predictors.regression_duration import RegressionDurationModel
from src.infrastructure.repositories.local_file_repository import (
    LocalArtifactRepository, LocalCorpusRepository, LocalModelRepository, decode_jdmp, decode_jdsp,
    encode_jdmp, encode_jdsp, encode_pgm,
)


def test_jdsp_layout_and_round_trip():
    x = Spectrogram(np.array([[0.1, 0.2, 0.3], [1.5, -2.0, 4.0]]))
    payload = encode_jdsp(x)
    assert payload[:4] == b"JDSP"
    assert struct.unpack("<II", payload[4:12]) == (2, 3)
    assert len(payload) == 12 + 4 * 6
    np.testing.assert_array_equal(decode_jdsp(payload).data, x.data.astype(np.float32).astype(np.float64))


def test_jdsp_rejects_corrupt_payloads():
    payload = encode_jdsp(Spectrogram(np.ones((2, 3))))
    with pytest.raises(CorruptFileError):
        decode_jdsp(b"XDSP" + payload[4:])
    with pytest.raises(CorruptFileError):
        decode_jdsp(payload[:-4])
    with pytest.raises(CorruptFileError):
        decode_jdsp(b"JD")


def test_jdmp_round_trip_and_corruption():
    params = {"b": np.arange(3.0), "a": np.ones((2, 2))}
    payload = encode_jdmp("conv_location", {"num_bins": 2}, params)
    kind, config, loaded = decode_jdmp(payload)
    assert kind == "conv_location" and config == {"num_bins": 2}
    for name in params:
        np.testing.assert_array_equal(loaded[name], params[name])
    with pytest.raises(CorruptFileError):
        decode_jdmp(payload[:-2])
    with pytest.raises(CorruptFileError):
        decode_jdmp(payload[:4] + struct.pack("<I", 2) + payload[8:])


def test_pgm_puts_bin_zero_at_the_bottom():
    payload = encode_pgm(np.array([[0.0, 0.0], [1.0, 1.0]]))
    header = b"P5\n2 2\n255\n"
    assert payload.startswith(header)
    assert list(payload[len(header):]) == [255, 255, 0, 0]
    with pytest.raises(ValidationError):
        encode_pgm(np.zeros((0, 3)))


def test_artifacts_round_trip(tmp_path):
    repo = LocalArtifactRepository(str(tmp_path))
    repo.save_json("a/doc.json", {"b": 1, "a": [1, 2]})
    assert repo.load_json("a/doc.json") == {"a": [1, 2], "b": 1}
    table = pd.DataFrame({"metric": ["x", "y"], "value": [1.5, 2.0]})
    repo.save_table("a/t.csv", table)
    pd.testing.assert_frame_equal(repo.load_table("a/t.csv"), table)
    repo.save_spectrogram("s/one.jdsp", Spectrogram(np.zeros((1, 2))))
    assert repo.list_files("s", ".jdsp") == ["s/one.jdsp"]
    assert repo.list_files("missing", ".jdsp") == []
    with pytest.raises(ValidationError):
        repo.read_bytes("nothing.bin")


def test_corpus_round_trip(tmp_path, small_corpus):
    repo = LocalCorpusRepository(LocalArtifactRepository(str(tmp_path)))
    repo.save_corpus(small_corpus)
    loaded = repo.load_corpus()
    assert len(loaded) == len(small_corpus)
    assert loaded.seed == small_corpus.seed
    for u, v in zip(small_corpus, loaded):
        assert v.utterance_id == u.utterance_id
        assert v.durations == u.durations and v.phones == u.phones
        np.testing.assert_array_equal(v.x0.data, u.x0.data.astype(np.float32))
        assert v.mu.bit_equal(u.mu)


def test_missing_corpus_is_a_validation_error(tmp_path):
    with pytest.raises(ValidationError):
        LocalCorpusRepository(LocalArtifactRepository(str(tmp_path))).load_corpus()


@pytest.mark.parametrize("model", [
    ConvLocationModel(3, ModelConfig(hidden_channels=4), np.random.default_rng(0)),
    ConvContentModel(3, ModelConfig(hidden_channels=4, num_layers=2), np.random.default_rng(0), lambda_prior=0.3),
    RegressionDurationModel(5, init_mean=4.0, rng=np.random.default_rng(0)),
], ids=lambda m: m.kind)
def test_model_checkpoints_round_trip(tmp_path, model):
    repo = LocalModelRepository(LocalArtifactRepository(str(tmp_path)), MODEL_BUILDERS)
    repo.save_model("m", model)
    assert repo.has_model("m")
    loaded = repo.load_model("m")
    assert type(loaded) is type(model)
    assert loaded.config_dict() == model.config_dict()
    for name, p in model.parameters().items():
        np.testing.assert_array_equal(loaded.parameters()[name], p.astype(np.float32))


def test_unknown_checkpoint_kind(tmp_path):
    artifacts = LocalArtifactRepository(str(tmp_path))
    artifacts.write_bytes("models/x.jdmp", encode_jdmp("mystery", {}, {"w": np.zeros(1)}))
    with pytest.raises(CorruptFileError):
        LocalModelRepository(artifacts, MODEL_BUILDERS).load_model("x")
