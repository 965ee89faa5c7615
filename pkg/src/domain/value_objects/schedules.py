# src/domain/value_objects/schedules.py
"""Length schedule and variance-preserving noise kernel.

beta(t) = beta_0 + t * (beta_1 - beta_0), defaults (0.05, 20).
"""
import math
from fractions import Fraction
from dataclasses import dataclass

from src.domain.entities.spectrogram import check_time
from src.domain.exceptions import ValidationError

DEFAULT_T_MIN = 0.1


@dataclass(frozen=True)
class NoiseSchedule:
    beta_0: float = 0.05
    beta_1: float = 20.0

    def __post_init__(self):
        if not 0 < self.beta_0 <= self.beta_1:
            raise ValidationError(
                f"need 0 < beta_0 <= beta_1, got ({self.beta_0}, {self.beta_1})", field="beta_0")

    def beta(self, t: float) -> float:
        return self.beta_0 + t * (self.beta_1 - self.beta_0)


@dataclass(frozen=True)
class KernelCoeffs:
    a_t: float
    m_t: float
    sigma_t: float


def schedule_length(L0: int, p_size: int, t: float, t_min: float = DEFAULT_T_MIN) -> int:
    """Number of frames alive at time t; L0 up to t_min, |P| at t = 1."""
    t = check_time(t)
    if p_size > L0:
        raise ValidationError(f"protected size {p_size} exceeds length {L0}", field="p_size")
    if not 0.0 < t_min < 1.0:
        raise ValidationError(f"must lie in (0, 1), got {t_min}", field="t_min")
    if t <= t_min:
        return int(L0)
    # exact rationals of the decimal values: 0.55 is 11/20
    t_exact, t_min_exact = Fraction(repr(float(t))), Fraction(repr(float(t_min)))
    factor = 1 - (t_exact - t_min_exact) / (1 - t_min_exact)
    return int(p_size + math.floor(factor * (L0 - p_size)))


def cum_beta(sched: NoiseSchedule, t: float) -> float:
    """Closed-form integral of beta over [0, t]."""
    t = check_time(t)
    return sched.beta_0 * t + 0.5 * (sched.beta_1 - sched.beta_0) * t * t


def vp_coefficients(sched: NoiseSchedule, t: float) -> KernelCoeffs:
    integral = cum_beta(sched, t)
    a_t = math.exp(-0.5 * integral)
    # -expm1 keeps sigma exact near t = 0
    return KernelCoeffs(a_t=a_t, m_t=1.0 - a_t, sigma_t=math.sqrt(-math.expm1(-integral)))
