# src/infrastructure/repositories/local_file_repository.py
"""Filesystem persistence for corpora, checkpoints and run artifacts.

Binary formats (little endian):
  JDSP  b"JDSP", u32 D, u32 L, D*L float32 row-major (bin-major).
  JDMP  b"JDMP", u32 version, u32 header length, UTF-8 JSON header
        {kind, config, tensors: [{name, shape}]}, then every tensor as float32.
"""
import json
import logging
import os
import struct
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

from src.domain.entities.spectrogram import Spectrogram, upsample_prior
from src.domain.entities.utterance import Corpus, PhoneInventory, Utterance
from src.domain.exceptions import CorruptFileError, ValidationError
from src.domain.interfaces.predictors import TrainableModel
from src.domain.interfaces.repositories import ArtifactRepository, CorpusRepository, ModelRepository
from src.infrastructure.config.output_layout import OutputLayout

JDSP_MAGIC = b"JDSP"
JDMP_MAGIC = b"JDMP"
JDMP_VERSION = 1
_F32 = np.dtype("<f4")


def encode_jdsp(x: Spectrogram) -> bytes:
    return JDSP_MAGIC + struct.pack("<II", x.D, x.L) + x.data.astype(_F32).tobytes(order="C")


def decode_jdsp(payload: bytes) -> Spectrogram:
    if len(payload) < 12 or payload[:4] != JDSP_MAGIC:
        raise CorruptFileError("missing JDSP magic", field="payload")
    num_bins, num_frames = struct.unpack("<II", payload[4:12])
    expected = 12 + 4 * num_bins * num_frames
    if len(payload) != expected:
        raise CorruptFileError(f"expected {expected} bytes, got {len(payload)}", field="payload")
    data = np.frombuffer(payload, dtype=_F32, offset=12).reshape(num_bins, num_frames)
    return Spectrogram(data.astype(np.float64))


def encode_jdmp(kind: str, config: Dict[str, Any], params: Dict[str, np.ndarray]) -> bytes:
    names = sorted(params)
    header = json.dumps({
        "kind": kind,
        "config": config,
        "tensors": [{"name": n, "shape": list(params[n].shape)} for n in names],
    }, sort_keys=True).encode("utf-8")
    body = b"".join(np.asarray(params[n]).astype(_F32).tobytes(order="C") for n in names)
    return JDMP_MAGIC + struct.pack("<II", JDMP_VERSION, len(header)) + header + body


def decode_jdmp(payload: bytes) -> Tuple[str, Dict[str, Any], Dict[str, np.ndarray]]:
    if len(payload) < 12 or payload[:4] != JDMP_MAGIC:
        raise CorruptFileError("missing JDMP magic", field="payload")
    version, header_length = struct.unpack("<II", payload[4:12])
    if version != JDMP_VERSION:
        raise CorruptFileError(f"unsupported version {version}", field="payload")
    try:
        header = json.loads(payload[12:12 + header_length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptFileError(f"unreadable header: {e}", field="payload") from e
    offset = 12 + header_length
    params = {}
    for tensor in header["tensors"]:
        shape = tuple(tensor["shape"])
        count = int(np.prod(shape)) if shape else 1
        if offset + 4 * count > len(payload):
            raise CorruptFileError(f"tensor {tensor['name']} is truncated", field="payload")
        data = np.frombuffer(payload, dtype=_F32, count=count, offset=offset)
        params[tensor["name"]] = data.reshape(shape).astype(np.float64)
        offset += 4 * count
    if offset != len(payload):
        raise CorruptFileError(f"{len(payload) - offset} trailing bytes", field="payload")
    return header["kind"], header["config"], params


def encode_pgm(grid: np.ndarray) -> bytes:
    """Binary P5 greyscale, min-max normalized, row 0 of the grid drawn at the bottom."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2 or grid.size == 0:
        raise ValidationError(f"expected a nonempty 2-D grid, got {grid.shape}", field="grid")
    low, high = float(grid.min()), float(grid.max())
    scaled = np.zeros_like(grid) if high == low else (grid - low) / (high - low)
    pixels = np.round(scaled[::-1] * 255.0).astype(np.uint8)
    height, width = pixels.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()


class LocalArtifactRepository(ArtifactRepository):
    """Implementation of ArtifactRepository on a local directory."""

    def __init__(self, root_dir: str):
        self.root_dir = root_dir
        self.logger = logging.getLogger(__name__)

    def path(self, relative_path: str) -> str:
        return os.path.join(self.root_dir, relative_path)

    def write_bytes(self, relative_path: str, payload: bytes) -> str:
        full_path = self.path(relative_path)
        try:
            os.makedirs(os.path.dirname(full_path) or ".", exist_ok=True)
            with open(full_path, "wb") as handle:
                handle.write(payload)
            self.logger.debug(f"Wrote {len(payload)} bytes to {full_path}")
            return full_path
        except Exception as e:
            self.logger.error(f"Error writing {full_path}: {str(e)}")
            raise

    def read_bytes(self, relative_path: str) -> bytes:
        full_path = self.path(relative_path)
        if not os.path.exists(full_path):
            raise ValidationError(f"{full_path} does not exist", field="path")
        with open(full_path, "rb") as handle:
            return handle.read()

    def save_spectrogram(self, relative_path: str, x: Spectrogram) -> str:
        return self.write_bytes(relative_path, encode_jdsp(x))

    def load_spectrogram(self, relative_path: str) -> Spectrogram:
        return decode_jdsp(self.read_bytes(relative_path))

    def save_json(self, relative_path: str, document: Dict[str, Any]) -> str:
        return self.write_bytes(relative_path, json.dumps(document, indent=2, sort_keys=True).encode("utf-8"))

    def load_json(self, relative_path: str) -> Dict[str, Any]:
        return json.loads(self.read_bytes(relative_path).decode("utf-8"))

    def save_table(self, relative_path: str, table: pd.DataFrame) -> str:
        return self.write_bytes(relative_path, table.to_csv(index=False).encode("utf-8"))

    def load_table(self, relative_path: str) -> pd.DataFrame:
        return pd.read_csv(self.path(relative_path))

    def save_image(self, relative_path: str, grid: np.ndarray) -> str:
        return self.write_bytes(relative_path, encode_pgm(grid))

    def exists(self, relative_path: str) -> bool:
        return os.path.exists(self.path(relative_path))

    def list_files(self, relative_dir: str, suffix: str) -> List[str]:
        full_dir = self.path(relative_dir)
        if not os.path.isdir(full_dir):
            return []
        return sorted(os.path.join(relative_dir, name) for name in os.listdir(full_dir) if name.endswith(suffix))


class LocalCorpusRepository(CorpusRepository):
    """Corpus as one JDSP file per utterance plus a JSON manifest."""

    def __init__(self, artifacts: LocalArtifactRepository):
        self.artifacts = artifacts
        self.logger = logging.getLogger(__name__)

    def save_corpus(self, corpus: Corpus) -> str:
        inventory = corpus.inventory
        manifest = {
            "seed": corpus.seed,
            "config": corpus.config,
            "inventory": {
                "prototypes": inventory.prototypes.tolist(),
                "silence_flags": list(inventory.silence_flags),
                "frame_variance": inventory.frame_variance,
                "silence_threshold": inventory.silence_threshold,
            },
            "utterances": [],
        }
        for u in corpus:
            file_name = OutputLayout.corpus_spectrogram(u.utterance_id)
            self.artifacts.save_spectrogram(file_name, u.x0)
            manifest["utterances"].append({
                "id": u.utterance_id,
                "phones": list(u.phones),
                "durations": list(u.durations),
                "file": os.path.basename(file_name),
            })
        path = self.artifacts.save_json(OutputLayout.corpus_manifest(), manifest)
        self.logger.info(f"Saved corpus of {len(corpus)} utterances to {path}")
        return path

    def load_corpus(self) -> Corpus:
        if not self.artifacts.exists(OutputLayout.corpus_manifest()):
            raise ValidationError("no corpus found; run gen-corpus first", field="corpus")
        manifest = self.artifacts.load_json(OutputLayout.corpus_manifest())
        inv = manifest["inventory"]
        inventory = PhoneInventory(
            prototypes=np.asarray(inv["prototypes"], dtype=np.float64),
            silence_flags=tuple(inv["silence_flags"]),
            frame_variance=float(inv["frame_variance"]),
            silence_threshold=float(inv["silence_threshold"]),
        )
        utterances = []
        for entry in manifest["utterances"]:
            x0 = self.artifacts.load_spectrogram(OutputLayout.CORPUS_PREFIX + entry["file"])
            utterances.append(Utterance(
                utterance_id=entry["id"],
                phones=tuple(entry["phones"]),
                durations=tuple(entry["durations"]),
                x0=x0,
                mu=upsample_prior(inventory.phone_means(entry["phones"]), entry["durations"]),
            ))
        return Corpus(inventory=inventory, utterances=tuple(utterances),
                      seed=int(manifest["seed"]), config=manifest["config"])


ModelBuilder = Callable[[Dict[str, Any], Dict[str, np.ndarray]], TrainableModel]


class LocalModelRepository(ModelRepository):
    """JDMP checkpoints; `builders` maps a model kind to its constructor."""

    def __init__(self, artifacts: LocalArtifactRepository, builders: Dict[str, ModelBuilder]):
        self.artifacts = artifacts
        self.builders = builders
        self.logger = logging.getLogger(__name__)

    def save_model(self, name: str, model: TrainableModel) -> str:
        payload = encode_jdmp(model.kind, model.config_dict(), model.parameters())
        return self.artifacts.write_bytes(OutputLayout.model_path(name), payload)

    def load_model(self, name: str) -> TrainableModel:
        kind, config, params = decode_jdmp(self.artifacts.read_bytes(OutputLayout.model_path(name)))
        if kind not in self.builders:
            raise CorruptFileError(f"unknown model kind {kind!r}", field="kind")
        self.logger.debug(f"Loaded {kind} checkpoint {name}")
        return self.builders[kind](config, params)

    def has_model(self, name: str) -> bool:
        return self.artifacts.exists(OutputLayout.model_path(name))
