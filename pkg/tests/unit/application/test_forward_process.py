# tests/unit/application/test_forward_process.py
import numpy as np
import pytest

from src.application.services.forward_process import (
    forward_sample, forward_sample_full, make_jump_target, sample_triplet, spectral_corrupt,
    structural_corrupt,
)
from src.domain.entities.spectrogram import (
    Alignment, Spectrogram, insert_column, protected_from_alignment, upsample_prior,
)
from src.domain.exceptions import NoDeletableFrameError, ValidationError
from src.domain.value_objects.schedules import schedule_length, vp_coefficients


def _toy(durations=(3, 2, 4), num_bins=2, seed=0):
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(num_bins, len(durations)))
    mu = upsample_prior(means, durations)
    x0 = Spectrogram(mu.data + 0.1 * rng.standard_normal(mu.shape))
    return x0, mu, Alignment.from_durations(range(len(durations)), durations)


def test_structural_corrupt_extremes():
    x0, mu, a = _toy()
    p = protected_from_alignment(a)
    early = structural_corrupt(x0, mu, p, 0.05, np.random.default_rng(1))
    assert early.kept == tuple(range(x0.L))
    assert early.x_t.bit_equal(x0)
    final = structural_corrupt(x0, mu, p, 1.0, np.random.default_rng(1))
    assert final.kept == p.indices
    assert final.mu_sub.bit_equal(mu.select(p.indices))


def test_structural_corrupt_keeps_protected_and_schedule_length():
    x0, mu, a = _toy((5, 7, 3, 9))
    p = protected_from_alignment(a)
    rng = np.random.default_rng(2)
    for _ in range(10_000):
        t = float(rng.uniform())
        result = structural_corrupt(x0, mu, p, t, rng)
        assert set(p.indices) <= set(result.kept)
        assert len(result.kept) == schedule_length(x0.L, len(p), t)


def test_structural_corrupt_draws_a_uniform_subset():
    # 6 frames, frame 0 protected, keep 3 of the 5 others: every frame is kept with probability 3/5
    x0, mu, a = _toy((6,), num_bins=1)
    p = protected_from_alignment(a)
    t = 0.1 + 0.9 * (1.0 - 3 / 5) - 1e-6
    assert schedule_length(6, 1, t) == 4
    rng = np.random.default_rng(3)
    n = 20_000
    counts = np.zeros(6)
    for _ in range(n):
        counts[list(structural_corrupt(x0, mu, p, t, rng).kept)] += 1
    freq = counts[1:] / n
    se = np.sqrt(0.6 * 0.4 / n)
    assert counts[0] == n
    assert np.all(np.abs(freq - 0.6) < 4 * se)


def test_structural_corrupt_kept_sets_are_nested_for_one_seed():
    x0, mu, a = _toy((6, 4, 8))
    p = protected_from_alignment(a)
    kept = [set(structural_corrupt(x0, mu, p, t, np.random.default_rng(11)).kept)
            for t in (0.2, 0.5, 0.8, 1.0)]
    assert all(later <= earlier for earlier, later in zip(kept, kept[1:]))


def test_spectral_corrupt_identity_at_zero(sched, rng):
    x0, mu, _ = _toy()
    assert spectral_corrupt(x0, mu, 0.0, sched, rng).bit_equal(x0)


def test_spectral_corrupt_constant_mean(sched):
    c = Spectrogram(np.full((1, 2), 0.7))
    rng = np.random.default_rng(4)
    draws = np.stack([spectral_corrupt(c, c, 0.6, sched, rng).data for _ in range(20_000)])
    assert np.abs(draws.mean(axis=0) - 0.7).max() < 0.03


def test_spectral_corrupt_replays_noise(sched):
    x0, mu, _ = _toy()
    z = np.random.default_rng(5).standard_normal(x0.shape)
    full = spectral_corrupt(x0, mu, 0.4, sched, z=z)
    keep = [0, 2, 5]
    part = spectral_corrupt(x0.select(keep), mu.select(keep), 0.4, sched, z=z[:, keep])
    assert part.bit_equal(full.select(keep))
    with pytest.raises(ValidationError):
        spectral_corrupt(x0, mu.select([0]), 0.4, sched, np.random.default_rng(0))


def test_make_jump_target_with_one_deletable_column():
    x = Spectrogram(np.array([[1.0, 2.0]]))
    target = make_jump_target(x, x, [0], np.random.default_rng(0))
    assert (target.k, target.s_target) == (1, 1)
    assert target.x_minus_k.bit_equal(Spectrogram(np.array([[1.0]])))
    with pytest.raises(NoDeletableFrameError):
        make_jump_target(x, x, [0, 1], np.random.default_rng(0))


def test_reinserting_the_target_restores_the_clean_selection(sched):
    x0, mu, a = _toy((4, 6, 5))
    p = protected_from_alignment(a)
    rng = np.random.default_rng(6)
    for _ in range(50):
        corruption = structural_corrupt(x0, mu, p, 0.5, rng)
        protected = [i for i, f in enumerate(corruption.kept) if f in p]
        target = make_jump_target(corruption.x_t, corruption.x_t, protected, rng)
        assert target.k not in protected
        restored = insert_column(target.x_minus_k, target.x0_k, target.s_target)
        assert restored.bit_equal(corruption.x_t)


def test_forward_sample_at_t_one_has_only_protected_frames(sched):
    x0, mu, a = _toy((3, 3, 3))
    p = protected_from_alignment(a)
    assert structural_corrupt(x0, mu, p, 1.0, np.random.default_rng(0)).x_t.L == 3
    with pytest.raises(NoDeletableFrameError):
        forward_sample_full(x0, mu, a, 1.0, sched, np.random.default_rng(0))


def test_forward_sample_is_deterministic(sched):
    x0, mu, a = _toy((5, 5))
    x1, t1 = forward_sample(x0, mu, a, 0.4, sched, np.random.default_rng(9))
    x2, t2 = forward_sample(x0, mu, a, 0.4, sched, np.random.default_rng(9))
    assert x1.bit_equal(x2)
    assert t1.k == t2.k and np.array_equal(t1.x0_k, t2.x0_k)


def test_sample_triplet_returns_none_without_deletable_frames(sched):
    x0, mu, a = _toy((1, 1, 1))
    assert sample_triplet(x0, mu, a, sched, np.random.default_rng(0), t=0.5) is None
    x0, mu, a = _toy((4, 4))
    triplet = sample_triplet(x0, mu, a, sched, np.random.default_rng(0), t=0.0)
    assert triplet.x_minus_k.L == triplet.x_t.L - 1
    assert triplet.mu_minus_k.L == triplet.mu_t.L - 1
    np.testing.assert_array_equal(triplet.x0_k, x0.column(triplet.k))


def test_structural_corrupt_keeps_phone_initial_columns_in_order():
    rng = np.random.default_rng(12)
    for _ in range(200):
        durations = [int(d) for d in rng.integers(1, 8, size=int(rng.integers(1, 7)))]
        x0, mu, a = _toy(durations, seed=int(rng.integers(1000)))
        p = protected_from_alignment(a)
        result = structural_corrupt(x0, mu, p, float(rng.uniform()), rng)
        assert list(result.kept) == sorted(result.kept)
        positions = [result.kept.index(i) for i in p.indices]
        assert positions == sorted(positions)
        assert result.x_t.select(positions).bit_equal(x0.select(p.indices))


@pytest.mark.parametrize("t", [0.25, 0.5, 0.75])
def test_spectral_corrupt_variance_matches_sigma(sched, t):
    x0, mu, _ = _toy((10, 15, 25), num_bins=4)
    rng = np.random.default_rng(13)
    n = 500
    draws = np.stack([spectral_corrupt(x0, mu, t, sched, rng).data for _ in range(n)])
    sigma2 = vp_coefficients(sched, t).sigma_t ** 2
    pooled = draws.var(axis=0, ddof=1).mean()
    assert pooled / sigma2 == pytest.approx(1.0, abs=0.02)
