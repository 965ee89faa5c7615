# src/application/use_cases/selftest.py
"""Fast invariant suite run by the `selftest` subcommand."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from src.application.services.evaluation import (
    dtw_path, marginal_check, path_linearity, silence_ratio_from_totals, wasserstein1,
)
from src.application.services.forward_process import deletion_order, sample_triplet, structural_corrupt
from src.application.services.gradient_check import gradient_check
from src.application.services.losses import content_loss, location_loss
from src.application.services.reverse_process import AnalyticScore, synthesize
from src.domain.entities.spectrogram import Spectrogram, delete_column, insert_column, protected_from_alignment
from src.domain.entities.utterance import Corpus, Utterance
from src.domain.interfaces.services import ObservabilityService
from src.domain.value_objects.configs import CorpusConfig, ModelConfig, SamplerConfig
from src.domain.value_objects.schedules import NoiseSchedule, cum_beta, schedule_length, vp_coefficients
from src.infrastructure.predictors.conv_models import ConvContentModel, ConvLocationModel
from src.infrastructure.predictors.oracle import OracleContentModel, OracleLocationModel, OracleTracker
from src.infrastructure.predictors.regression_duration import RegressionDurationModel
from src.infrastructure.services.synthetic_corpus_service import gen_corpus

SCHEDULE_EXAMPLES = ((100, 20, 1.0, 20), (100, 20, 0.1, 100), (100, 20, 0.55, 60), (73, 10, 0.37, 54))
# (total, silent, percent) in seconds
SILENCE_TABLE = ((6.26, 0.45, 7.19), (7.37, 0.47, 6.38), (7.37, 0.71, 9.63), (7.37, 0.61, 8.28))
MARGINAL_TIMES = (0.25, 0.5, 0.75)
SELFTEST_CORPUS = CorpusConfig(num_bins=4, num_phones=3, num_utterances=3, min_phones=3, max_phones=4)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def oracle_round_trip(u: Utterance, corpus: Corpus, sched: NoiseSchedule, cfg: SamplerConfig,
                      seed: int) -> Tuple[List[int], Tuple[int, ...]]:
    """Reverse run with oracles; returns the steps whose restored frames differ from the forward kept set,
    and the final per-phone durations."""
    p = protected_from_alignment(u.alignment)
    order = deletion_order(p, u.num_frames, np.random.default_rng(seed))
    tracker = OracleTracker(u.x0, p, order, cfg.t_min)
    mismatches: List[int] = []

    def on_step(entry, state):
        expected = structural_corrupt(u.x0, u.mu, p, entry["t"], np.random.default_rng(seed), cfg.t_min).kept
        if tuple(tracker.kept) != expected:
            mismatches.append(entry["step"])

    _, trace = synthesize(u.phone_means(corpus.inventory), u.num_frames,
                          OracleLocationModel(tracker), OracleContentModel(tracker),
                          AnalyticScore(corpus.inventory.frame_variance, sched), cfg, sched,
                          np.random.default_rng(seed + 1), on_step)
    return mismatches, tuple(trace.durations)


class SelftestUseCase:
    """Runs every check and reports each result; nothing is written to disk."""

    def __init__(self, observability_service: ObservabilityService, seed: int = 0):
        self.logger = logging.getLogger(__name__)
        self.observability_service = observability_service
        self.seed = seed
        self.sched = NoiseSchedule()
        self.rng = np.random.default_rng(seed)
        self.corpus = gen_corpus(SELFTEST_CORPUS, np.random.default_rng(seed), seed)

    def check_schedule(self) -> Tuple[bool, str]:
        got = [schedule_length(L0, p, t, 0.1) for L0, p, t, _ in SCHEDULE_EXAMPLES]
        kernel_ok = math.isclose(cum_beta(self.sched, 1.0), 10.025, abs_tol=1e-12)
        c0 = vp_coefficients(self.sched, 0.0)
        return got == [e[-1] for e in SCHEDULE_EXAMPLES] and kernel_ok and (c0.a_t, c0.m_t, c0.sigma_t) == (1.0, 0.0, 0.0), str(got)

    def check_round_trip(self) -> Tuple[bool, str]:
        x = Spectrogram(self.rng.standard_normal((4, 7)))
        ok = all(insert_column(delete_column(x, k), x.column(k), k).bit_equal(x) for k in range(1, 7))
        return ok, "delete/insert on 7 columns"

    def check_protected(self) -> Tuple[bool, str]:
        violations = 0
        for _ in range(1000):
            u = self.corpus.utterances[int(self.rng.integers(len(self.corpus)))]
            p = protected_from_alignment(u.alignment)
            kept = structural_corrupt(u.x0, u.mu, p, float(self.rng.uniform()), self.rng).kept
            violations += int(not set(p.indices) <= set(kept))
        return violations == 0, f"{violations} violations in 1000 corruptions"

    def check_marginal(self) -> Tuple[bool, str]:
        u = self.corpus.utterances[0]
        reports = [marginal_check(u.x0.select([0, 1]), u.mu.select([0, 1]), t, self.sched, 100_000, self.rng)
                   for t in MARGINAL_TIMES]
        worst = max(reports, key=lambda r: r.max_mean_deviation)
        return all(r.passed() for r in reports), \
            f"worst deviation {worst.max_mean_deviation:.2f} SE at t={worst.t}, " \
            f"ratios {', '.join(f'{r.variance_ratio:.4f}' for r in reports)}"

    def check_arithmetic(self) -> Tuple[bool, str]:
        ratios = [round(100 * silence_ratio_from_totals(total, silent), 2) for total, silent, _ in SILENCE_TABLE]
        ok = ratios == [e[-1] for e in SILENCE_TABLE]
        ok &= math.isclose(location_loss(np.zeros(50), 1), math.log(50), rel_tol=1e-12)
        ok &= math.isclose(content_loss(np.ones(2), np.zeros(2), np.array([1.0, 0.0]), 0.01), 2.01, rel_tol=1e-12)
        ok &= math.isclose(wasserstein1([3, 9], [6]), 3.0, rel_tol=1e-12)
        return ok, str(ratios)

    def check_gradients(self) -> Tuple[bool, str]:
        triplets = [sample_triplet(u.x0, u.mu, u.alignment, self.sched, self.rng, t=0.05) for u in self.corpus]
        batch = [tr for tr in triplets if tr is not None]
        config = ModelConfig(hidden_channels=3, num_layers=2, init_scale=0.5)
        errors = [
            gradient_check(ConvLocationModel(4, config, self.rng), batch),
            gradient_check(ConvContentModel(4, config, self.rng), batch),
            gradient_check(RegressionDurationModel(self.corpus.inventory.num_phone_ids, 5.0, self.rng),
                           list(self.corpus.utterances)),
        ]
        return max(errors) < 1e-4, f"max relative error {max(errors):.2e}"

    def check_oracle(self) -> Tuple[bool, str]:
        cfg = SamplerConfig(mode="tdd", solver="ode", steps=20, allocation="argmax", temperature=1.0)
        failures = 0
        for u in self.corpus:
            mismatches, durations = oracle_round_trip(u, self.corpus, self.sched, cfg, self.seed)
            failures += int(bool(mismatches) or durations != u.durations)
        return failures == 0, f"{failures} utterances not restored"

    def check_dtw(self) -> Tuple[bool, str]:
        x = self.corpus.utterances[0].x0
        result = dtw_path(x, x)
        return result.cost == 0.0 and path_linearity(result) == 1.0, f"cost {result.cost}"

    def checks(self) -> List[Tuple[str, Callable[[], Tuple[bool, str]]]]:
        return [
            ("schedule", self.check_schedule),
            ("insert_delete_round_trip", self.check_round_trip),
            ("protected_frames", self.check_protected),
            ("forward_marginal", self.check_marginal),
            ("loss_and_ratio_arithmetic", self.check_arithmetic),
            ("gradients", self.check_gradients),
            ("oracle_round_trip", self.check_oracle),
            ("dtw_identity", self.check_dtw),
        ]

    def execute(self) -> List[CheckResult]:
        try:
            self.observability_service.log_event("selftest_started", {"seed": self.seed})
            results = []
            for name, check in self.checks():
                passed, detail = check()
                results.append(CheckResult(name, bool(passed), detail))
                self.logger.info(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
            failed = [r.name for r in results if not r.passed]
            self.observability_service.log_event(
                "selftest_completed", {"checks": len(results), "failed": failed})
            return results

        except Exception as e:
            self.logger.error(f"Error running selftest: {str(e)}")
            self.observability_service.log_event("selftest_failed", {"error": str(e)})
            raise
