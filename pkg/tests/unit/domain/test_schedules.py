# tests/unit/domain/test_schedules.py
import math

import numpy as np
import pytest
from scipy.integrate import quad

from src.domain.exceptions import ValidationError
from src.domain.value_objects.schedules import NoiseSchedule, cum_beta, schedule_length, vp_coefficients


@pytest.mark.parametrize("L0, p_size, t, expected", [
    (100, 20, 1.0, 20),
    (100, 20, 0.1, 100),
    (100, 20, 0.55, 60),
    (73, 10, 0.37, 54),
])
def test_schedule_length_examples(L0, p_size, t, expected):
    assert schedule_length(L0, p_size, t, 0.1) == expected


@pytest.mark.parametrize("t, expected", [
    (0.550000000005625, 59),  # 80 * factor = 39.9999999995
    (0.55, 60),
    (0.775, 40),
    (0.9999999999, 20),
])
def test_schedule_length_floors_exactly_near_integers(t, expected):
    assert schedule_length(100, 20, t, 0.1) == expected


def test_schedule_length_is_monotone_and_bounded():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        L0 = int(rng.integers(1, 300))
        p_size = int(rng.integers(1, L0 + 1))
        t_a, t_b = sorted(rng.uniform(0.0, 1.0, size=2))
        early, late = schedule_length(L0, p_size, t_a), schedule_length(L0, p_size, t_b)
        assert p_size <= late <= early <= L0
        assert schedule_length(L0, p_size, 0.0) == L0
        assert schedule_length(L0, p_size, 1.0) == p_size


def test_schedule_length_rejects_invalid_input():
    with pytest.raises(ValidationError):
        schedule_length(10, 11, 0.5)
    with pytest.raises(ValidationError):
        schedule_length(10, 2, 1.5)


def test_cum_beta(sched):
    assert cum_beta(sched, 0.0) == 0.0
    assert cum_beta(sched, 1.0) == pytest.approx(10.025)
    for t in (0.1, 0.37, 0.8):
        integral, _ = quad(sched.beta, 0.0, t)
        assert cum_beta(sched, t) == pytest.approx(integral, rel=1e-10)


def test_vp_coefficients(sched):
    c0 = vp_coefficients(sched, 0.0)
    assert (c0.a_t, c0.m_t, c0.sigma_t) == (1.0, 0.0, 0.0)
    c1 = vp_coefficients(sched, 1.0)
    assert c1.a_t == pytest.approx(0.00666, abs=1e-5)
    assert c1.sigma_t == pytest.approx(0.99998, abs=1e-5)
    half = vp_coefficients(sched, 0.5)
    assert half.a_t == pytest.approx(0.2839, abs=1e-4)
    assert half.sigma_t == pytest.approx(0.9589, abs=1e-4)


def test_kernel_is_variance_preserving(sched):
    for t in np.linspace(0.0, 1.0, 11):
        c = vp_coefficients(sched, t)
        assert c.a_t ** 2 + c.sigma_t ** 2 == pytest.approx(1.0)
        assert c.a_t + c.m_t == pytest.approx(1.0)


def test_noise_schedule_validation():
    with pytest.raises(ValidationError):
        NoiseSchedule(beta_0=0.0)
    assert NoiseSchedule().beta(1.0) == 20.0
    assert math.isclose(NoiseSchedule().beta(0.5), 10.025)
