# tests/unit/application/test_reverse_process.py
import numpy as np
import pytest
from scipy.stats import norm

from src.application.services.evaluation import wasserstein1
from src.application.services.reverse_process import (
    AnalyticScore, ReverseState, allocate_insertions, analytic_score, apportion, baseline_synthesize,
    denoise_step, jump_step, oneshot_synthesize, run_reverse, stretch_durations, synthesize, udd_round,
)
from src.application.use_cases.selftest import oracle_round_trip
from src.domain.entities.spectrogram import (
    ProvenanceMask, Spectrogram, protected_from_alignment, upsample_prior,
)
from src.domain.exceptions import ValidationError
from src.domain.interfaces.predictors import ScoreFunction
from src.domain.value_objects.configs import CorpusConfig, SamplerConfig
from src.domain.value_objects.schedules import schedule_length, vp_coefficients
from src.infrastructure.predictors.heuristics import PriorContentModel, UniformLocationModel
from src.infrastructure.predictors.oracle import OracleContentModel, OracleLocationModel, OracleTracker
from src.infrastructure.services.synthetic_corpus_service import gen_corpus

MEANS = np.array([[1.0, -1.0, 0.5], [-0.5, 1.5, -1.0]])


class ZeroScore(ScoreFunction):
    def score(self, x, mu, t):
        return np.zeros(x.shape)


def _heuristics():
    return UniformLocationModel(), PriorContentModel()


def test_analytic_score_examples(sched):
    mu = Spectrogram(MEANS)
    assert np.all(analytic_score(mu, mu, 0.5, 0.01, sched) == 0.0)
    one = Spectrogram(np.array([[0.0]]))
    score = analytic_score(Spectrogram(np.array([[1.0]])), one, 1.0, 0.0, sched)
    assert score[0, 0] == pytest.approx(-1.0, abs=1e-3)
    with pytest.raises(ValidationError):
        analytic_score(one, one, 0.0, 0.0, sched)


def test_analytic_score_is_the_gradient_of_the_marginal_log_density(sched):
    v, t, mu, x = 0.04, 0.3, 0.7, 1.1
    c = vp_coefficients(sched, t)
    scale = np.sqrt(c.a_t ** 2 * v + c.sigma_t ** 2)
    eps = 1e-5
    numeric = (norm.logpdf(x + eps, mu, scale) - norm.logpdf(x - eps, mu, scale)) / (2 * eps)
    score = AnalyticScore(v, sched).score(Spectrogram(np.array([[x]])), Spectrogram(np.array([[mu]])), t)
    assert score[0, 0] == pytest.approx(numeric, rel=1e-6)


def test_denoise_step_with_zero_score_keeps_the_prior(sched, rng):
    mu = Spectrogram(MEANS)
    assert denoise_step(mu, mu, 0.7, 0.1, ZeroScore(), "ode", sched).bit_equal(mu)
    with pytest.raises(ValidationError):
        denoise_step(mu, mu, 0.05, 0.1, ZeroScore(), "ode", sched)
    with pytest.raises(ValidationError):
        denoise_step(mu, mu, 0.5, 0.1, ZeroScore(), "sde", sched)
    with pytest.raises(ValidationError):
        denoise_step(mu, mu, 0.5, 0.1, ZeroScore(), "heun", sched, rng)


def test_allocate_insertions_examples():
    assert allocate_insertions(np.full(4, 0.25), 4, "argmax") == [1, 2, 3, 4]
    assert allocate_insertions(np.array([1.0, 0.0, 0.0]), 3, "sample", np.random.default_rng(0)) == [1, 1, 1]
    slots = allocate_insertions(np.array([0.5, 0.3, 0.2]), 10, "argmax")
    assert [slots.count(j) for j in (1, 2, 3)] == [5, 3, 2]


def test_allocate_insertions_with_nothing_to_insert_draws_nothing():
    rng = np.random.default_rng(5)
    assert allocate_insertions(np.full(3, 1 / 3), 0, "sample", rng) == []
    assert rng.random() == np.random.default_rng(5).random()


def test_allocate_insertions_sample_mode_is_seeded():
    probs = np.array([0.1, 0.6, 0.3])
    a = allocate_insertions(probs, 20, "sample", np.random.default_rng(2))
    b = allocate_insertions(probs, 20, "sample", np.random.default_rng(2))
    assert a == b and len(a) == 20 and a == sorted(a)
    with pytest.raises(ValidationError):
        allocate_insertions(np.array([0.5, 0.6]), 1, "argmax")


def test_apportion_breaks_ties_towards_lower_index():
    np.testing.assert_array_equal(apportion(1, np.array([0.5, 0.5])), [1, 0])
    np.testing.assert_array_equal(apportion(7, np.full(3, 1 / 3)), [3, 2, 2])


def test_jump_step_grows_the_state(sched, rng):
    loc, cont = _heuristics()
    state = ReverseState.initial(MEANS, rng)
    same, slots = jump_step(state, 0.5, 0, loc, cont, sched, "sample", rng)
    assert same is state and slots == []
    grown, slots = jump_step(state, 0.5, 4, loc, cont, sched, "sample", rng)
    assert grown.length == 7 and len(slots) == 4
    assert len(grown.provenance.original_indices()) == 3
    assert grown.mu.bit_equal(upsample_prior(MEANS, grown.durations(3)))
    seq, slots = jump_step(state, 0.5, 4, loc, cont, sched, "sample", rng, sequential=True)
    assert seq.length == 7 and len(slots) == 4


def test_oracle_jump_at_time_zero_restores_clean_frames(small_corpus, sched):
    u = small_corpus.utterances[1]
    p = protected_from_alignment(u.alignment)
    tracker = OracleTracker(u.x0, p)
    state = ReverseState(u.x0.select(p.indices), u.mu.select(p.indices),
                         ProvenanceMask.all_original(len(p)), tuple(range(len(p))))
    out, _ = jump_step(state, 0.0, u.num_frames - len(p), OracleLocationModel(tracker),
                       OracleContentModel(tracker), sched, "argmax", np.random.default_rng(0))
    np.testing.assert_allclose(out.x.data, u.x0.data, atol=1e-6)
    assert tuple(out.durations(u.num_phones)) == u.durations


def test_tdd_with_one_frame_per_phone_never_inserts(sched):
    loc, cont = _heuristics()
    cfg = SamplerConfig(mode="tdd", steps=10)
    x, trace = synthesize(MEANS, 3, loc, cont, AnalyticScore(0.01, sched), cfg, sched, np.random.default_rng(0))
    assert x.L == 3
    assert all(step["inserted"] == 0 for step in trace.steps)
    with pytest.raises(ValidationError):
        synthesize(MEANS, 2, loc, cont, AnalyticScore(0.01, sched), cfg, sched)


@pytest.mark.parametrize("mode", ["tdd", "udd"])
def test_reverse_lengths_follow_the_schedule(sched, mode):
    loc, cont = _heuristics()
    cfg = SamplerConfig(mode=mode, steps=20, solver="sde")
    state, trace = run_reverse(MEANS, 17, loc, cont, AnalyticScore(0.01, sched), cfg, sched,
                               np.random.default_rng(1))
    grid = cfg.time_grid()
    expected = [schedule_length(17, 3, grid[i], cfg.t_min) for i in range(cfg.steps)]
    assert trace.lengths()[:cfg.steps] == expected
    assert state.length == 17
    assert sum(trace.durations) == 17 and min(trace.durations) >= 1


def test_oneshot_without_insertions_is_pure_diffusion(sched):
    loc, cont = _heuristics()
    score = AnalyticScore(0.01, sched)
    tdd = SamplerConfig(mode="tdd", solver="sde", steps=15)
    one = SamplerConfig(mode="oneshot", solver="sde", steps=15)
    x_tdd, _ = synthesize(MEANS, 3, loc, cont, score, tdd, sched, np.random.default_rng(8))
    x_one = oneshot_synthesize(MEANS, 3, loc, cont, score, one, sched, np.random.default_rng(8))
    assert x_one.bit_equal(x_tdd)


def test_oneshot_inserts_everything_at_the_first_step(sched):
    loc, cont = _heuristics()
    cfg = SamplerConfig(mode="oneshot", steps=5)
    _, trace = synthesize(MEANS, 12, loc, cont, AnalyticScore(0.01, sched), cfg, sched, np.random.default_rng(0))
    assert trace.steps[0]["t"] == 1.0 and trace.steps[0]["inserted"] == 9


@pytest.mark.parametrize("mode", ["tdd", "udd", "oneshot"])
def test_synthesis_is_deterministic_for_a_seed(sched, mode):
    loc, cont = _heuristics()
    cfg = SamplerConfig(mode=mode, solver="sde", steps=12)
    score = AnalyticScore(0.01, sched)
    a, _ = synthesize(MEANS, 10, loc, cont, score, cfg, sched, np.random.default_rng(3))
    b, _ = synthesize(MEANS, 10, loc, cont, score, cfg, sched, np.random.default_rng(3))
    assert a.bit_equal(b)


def test_udd_round_at_full_length_is_a_plain_denoise(sched):
    loc, cont = _heuristics()
    cfg = SamplerConfig(mode="udd", solver="sde", steps=10)
    score = AnalyticScore(0.01, sched)
    state = ReverseState.initial(MEANS, np.random.default_rng(0))
    out = udd_round(state, 0.6, 3, loc, cont, score, sched, cfg, np.random.default_rng(4))
    expected = denoise_step(state.x, state.mu, 0.6, cfg.step_size, score, "sde", sched, np.random.default_rng(4))
    assert out.x.bit_equal(expected)


def test_udd_round_matches_a_replayed_pad_denoise_select(sched):
    loc, cont = _heuristics()
    cfg = SamplerConfig(mode="udd", solver="sde", steps=10)
    score = AnalyticScore(0.01, sched)
    state = ReverseState.initial(MEANS, np.random.default_rng(0))
    out = udd_round(state, 0.6, 9, loc, cont, score, sched, cfg, np.random.default_rng(4))

    replay = np.random.default_rng(4)
    canvas, _ = jump_step(state, 0.6, 6, loc, cont, sched, cfg.allocation, replay, cfg.temperature)
    x = denoise_step(canvas.x, canvas.mu, 0.6, cfg.step_size, score, "sde", sched, replay)
    kept = canvas.provenance.original_indices()
    assert out.length == 3
    assert out.x.bit_equal(x.select(kept))
    with pytest.raises(ValidationError):
        udd_round(canvas, 0.6, 3, loc, cont, score, sched, cfg, replay)


def test_stretch_durations():
    np.testing.assert_array_equal(stretch_durations([6, 6, 6], 9), [3, 3, 3])
    np.testing.assert_array_equal(stretch_durations([0.1, 10, 10], 3), [1, 1, 1])
    counts = stretch_durations([2.5, 7.2, 1.0, 4.4], 31)
    assert counts.sum() == 31 and counts.min() >= 1
    with pytest.raises(ValidationError):
        stretch_durations([1, 1, 1], 2)


def test_baseline_synthesize_uses_stretched_durations(sched):
    cfg = SamplerConfig(mode="regression", steps=10)
    x, trace = baseline_synthesize(MEANS, [2.0, 4.0, 2.0], 16, AnalyticScore(0.01, sched), cfg, sched,
                                   np.random.default_rng(0))
    assert x.L == 16
    assert trace.durations == [4, 8, 4]


def test_ode_sampling_recovers_the_prior_mean(sched):
    v = 0.01
    cfg = SamplerConfig(mode="tdd", solver="ode", steps=100)
    loc, cont = _heuristics()
    score = AnalyticScore(v, sched)
    draws = np.stack([
        synthesize(MEANS, 3, loc, cont, score, cfg, sched, np.random.default_rng(seed))[0].data
        for seed in range(400)
    ])
    assert np.abs(draws.mean(axis=0) - MEANS).max() <= 0.05 * MEANS.std()
    # Euler at N = 100 undershoots the flow's contraction by about 8%: variance near 0.84 v
    assert 0.7 * v <= draws.var(axis=0, ddof=1).mean() <= 1.3 * v


def test_oracle_round_trip_restores_the_forward_path(sched):
    corpus = gen_corpus(CorpusConfig(num_bins=3, num_phones=4, num_utterances=100, min_phones=3, max_phones=6),
                        np.random.default_rng(21), seed=21)
    cfg = SamplerConfig(mode="tdd", solver="ode", allocation="argmax", steps=20)
    for i, u in enumerate(corpus):
        mismatches, durations = oracle_round_trip(u, corpus, sched, cfg, seed=i)
        assert mismatches == [], u.utterance_id
        assert durations == u.durations


@pytest.mark.parametrize("t", [0.9, 0.5, 0.2])
def test_sde_increment_with_zero_score_has_variance_beta_h(sched, t):
    mu = Spectrogram(np.tile(MEANS[:, :1], (1, 50_000)))
    h = 0.01
    increment = denoise_step(mu, mu, t, h, ZeroScore(), "sde", sched, np.random.default_rng(17)).data - mu.data
    assert increment.size == 100_000
    assert increment.var(ddof=1) == pytest.approx(sched.beta(t) * h, rel=0.02)
    assert abs(increment.mean()) < 4 * np.sqrt(sched.beta(t) * h / increment.size)


def test_ode_endpoint_error_shrinks_as_steps_grow(sched):
    v = 0.01
    loc, cont = _heuristics()
    score = AnalyticScore(v, sched)
    c1 = vp_coefficients(sched, 1.0)
    contraction = np.sqrt(v / (c1.a_t ** 2 * v + c1.sigma_t ** 2))
    errors = []
    for steps in (10, 25, 50, 100):
        cfg = SamplerConfig(mode="tdd", solver="ode", steps=steps)
        per_seed = []
        for seed in range(100):
            x1 = MEANS + np.random.default_rng(seed).standard_normal(MEANS.shape)
            exact = MEANS + contraction * (x1 - MEANS)
            x, _ = synthesize(MEANS, 3, loc, cont, score, cfg, sched, np.random.default_rng(seed))
            per_seed.append(np.abs(x.data - exact).mean())
        errors.append(float(np.mean(per_seed)))
    assert all(later < earlier for earlier, later in zip(errors, errors[1:])), errors


def test_oneshot_oracle_durations_recover_both_modes(sched):
    corpus = gen_corpus(CorpusConfig(num_bins=3, num_phones=4, num_utterances=500, min_phones=3, max_phones=6),
                        np.random.default_rng(31), seed=31)
    cfg = SamplerConfig(mode="oneshot", solver="ode", allocation="argmax", steps=4)
    score = AnalyticScore(corpus.inventory.frame_variance, sched)
    sampled, truth = [], []
    for i, u in enumerate(corpus):
        tracker = OracleTracker(u.x0, protected_from_alignment(u.alignment))
        _, trace = synthesize(u.phone_means(corpus.inventory), u.num_frames, OracleLocationModel(tracker),
                              OracleContentModel(tracker), score, cfg, sched, np.random.default_rng(i))
        assert trace.steps[0]["t"] == 1.0
        speech = [not corpus.inventory.is_silence(ph) for ph in u.phones]
        sampled.extend(d for d, keep in zip(trace.durations, speech) if keep)
        truth.extend(d for d, keep in zip(u.durations, speech) if keep)
    assert len(sampled) == len(truth)
    assert wasserstein1(sampled, truth) == 0.0
    histogram = np.bincount(sampled)
    assert set(np.flatnonzero(histogram)) == {3, 9}
    assert min(histogram[3], histogram[9]) > 0.3 * len(sampled)
