# src/application/services/training.py
"""Minibatch training of the location and content predictors on forward-process triplets."""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.application.services.forward_process import TrainingTriplet, sample_triplet
from src.application.services.optim import Adam
from src.domain.entities.utterance import Utterance
from src.domain.exceptions import TrainingDivergenceError, ValidationError
from src.domain.interfaces.predictors import TrainableModel
from src.domain.value_objects.configs import TrainConfig
from src.domain.value_objects.schedules import DEFAULT_T_MIN, NoiseSchedule

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["epoch", "loc_loss", "cont_loss"]


@dataclass
class TrainingReport:
    epochs: List[dict] = field(default_factory=list)

    def add(self, epoch: int, loc_loss: float, cont_loss: float) -> None:
        self.epochs.append({"epoch": epoch, "loc_loss": loc_loss, "cont_loss": cont_loss})

    def __len__(self) -> int:
        return len(self.epochs)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.epochs, columns=REPORT_COLUMNS)


def sample_epoch_triplets(corpus: Sequence[Utterance], sched: NoiseSchedule, rng: np.random.Generator,
                          t_min: float = DEFAULT_T_MIN) -> List[TrainingTriplet]:
    """One fresh triplet per utterance; utterances with nothing deletable are skipped."""
    triplets = [sample_triplet(u.x0, u.mu, u.alignment, sched, rng, t_min) for u in corpus]
    return [tr for tr in triplets if tr is not None]


def _check_finite(epoch: int, name: str, loss: float, grads: dict) -> None:
    if not math.isfinite(loss):
        raise TrainingDivergenceError(epoch, f"{name} loss is {loss}")
    for param, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingDivergenceError(epoch, f"{name} gradient of {param} is not finite")


def train(
    corpus: Sequence[Utterance],
    loc: TrainableModel,
    cont: TrainableModel,
    cfg: TrainConfig,
    sched: Optional[NoiseSchedule] = None,
    rng: Optional[np.random.Generator] = None,
    t_min: float = DEFAULT_T_MIN,
    show_progress: bool = False,
) -> TrainingReport:
    """Separate Adam optimizers for both predictors, fresh t and corruption every epoch."""
    if not corpus:
        raise ValidationError("corpus is empty", field="corpus")
    sched = sched or NoiseSchedule()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    if hasattr(cont, "lambda_prior"):
        cont.lambda_prior = cfg.lambda_prior
    loc_opt = Adam.from_config(loc.parameters(), cfg)
    cont_opt = Adam.from_config(cont.parameters(), cfg)
    report = TrainingReport()

    for epoch in tqdm(range(cfg.epochs), desc="train", disable=not show_progress):
        triplets = sample_epoch_triplets(corpus, sched, rng, t_min)
        if not triplets:
            logger.warning(f"epoch {epoch}: no utterance had a deletable frame")
            continue
        order = rng.permutation(len(triplets))
        loc_total = cont_total = 0.0
        for start in range(0, len(triplets), cfg.batch_size):
            batch = [triplets[i] for i in order[start:start + cfg.batch_size]]
            loc_loss, loc_grads = loc.loss_and_gradients(batch)
            cont_loss, cont_grads = cont.loss_and_gradients(batch)
            _check_finite(epoch, "location", loc_loss, loc_grads)
            _check_finite(epoch, "content", cont_loss, cont_grads)
            loc_opt.step(loc_grads)
            cont_opt.step(cont_grads)
            loc_total += loc_loss * len(batch)
            cont_total += cont_loss * len(batch)
        report.add(epoch, loc_total / len(triplets), cont_total / len(triplets))
        logger.debug(f"epoch {epoch}: {report.epochs[-1]}")
    return report
