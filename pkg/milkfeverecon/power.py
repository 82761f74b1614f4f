"""
Trial design arithmetic: minimum detectable effect (MDE) of a trial that
assigns a share P of N animals to treatment, and the sample size that
reaches a target effect.

    MDE = (t_power + t_alpha) · sqrt(1 / (P(1-P))) · sqrt(σ² / N)
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from .errors import ValidationError
from .helpers import _check_finite, _check_positive

logger = logging.getLogger(__name__)

MIN_SAMPLE_SIZE = 2


@dataclass(frozen=True)
class PowerSpec:
    """
    Attributes:
        t_power: Standard-normal quantile for the power (0.84 for 80%).
        t_alpha: Quantile for the significance level (1.96 for 5%, two sided).
        treat_prop: P, share of the sample that is treated, in (0, 1).
        variance: σ², outcome variance.
        n: N, total sample size.
    """
    t_power: float
    t_alpha: float
    treat_prop: float
    variance: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "t_power", _check_finite("t_power", self.t_power))
        object.__setattr__(self, "t_alpha", _check_finite("t_alpha", self.t_alpha))
        _check_treat_prop(self.treat_prop)
        _check_positive("variance", self.variance)
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < MIN_SAMPLE_SIZE:
            raise ValidationError(f"'n' must be an integer >= {MIN_SAMPLE_SIZE}, got {self.n}.")
        object.__setattr__(self, "n", int(self.n))


class PowerSimulation(NamedTuple):
    rejection_rate: float
    std_err: float
    replicates: int


def _check_treat_prop(value: float) -> float:
    value = _check_finite("treat_prop", value)
    if not 0.0 < value < 1.0:
        raise ValidationError(f"'treat_prop' must lie strictly between 0 and 1, got {value}.")
    return value


def _mde(t_power: float, t_alpha: float, treat_prop: float, variance: float, n: float) -> float:
    return (t_power + t_alpha) * math.sqrt(1.0 / (treat_prop * (1.0 - treat_prop))) * math.sqrt(variance / n)


def minimum_detectable_effect(spec: PowerSpec) -> float:
    """
    Smallest true effect the trial detects at the given power and
    significance, in outcome units.

    >>> round(minimum_detectable_effect(PowerSpec(0.84, 1.96, 0.5, 1.0, 200)), 3)
    0.396
    """
    return _mde(spec.t_power, spec.t_alpha, spec.treat_prop, spec.variance, spec.n)


def required_sample_size(target_effect: float, t_power: float, t_alpha: float,
                         treat_prop: float, variance: float) -> int:
    """
    Smallest integer N (at least 2) with MDE(N) <= target_effect.

    Args:
        target_effect: Effect the trial must be able to detect (> 0).
        t_power: Quantile for the power.
        t_alpha: Quantile for the significance level.
        treat_prop: Treated share P.
        variance: σ².

    Returns:
        Total sample size N.
    """
    target_effect = _check_positive("target_effect", target_effect)
    t_power = _check_finite("t_power", t_power)
    t_alpha = _check_finite("t_alpha", t_alpha)
    treat_prop = _check_treat_prop(treat_prop)
    variance = _check_positive("variance", variance)

    exact = (t_power + t_alpha) ** 2 * variance / (treat_prop * (1.0 - treat_prop) * target_effect ** 2)
    n = max(MIN_SAMPLE_SIZE, math.ceil(exact))

    # the closed-form inverse can land one off either way after rounding
    def mde(k):
        return _mde(t_power, t_alpha, treat_prop, variance, k)

    while n > MIN_SAMPLE_SIZE and mde(n - 1) <= target_effect:
        n -= 1
    while mde(n) > target_effect:
        n += 1
    return n


def quantiles_from_levels(alpha: float = 0.05, power: float = 0.8, two_sided: bool = True):
    """
    Standard-normal quantiles (t_power, t_alpha) for a significance level
    and a power.

    :param alpha: Type I error rate, in (0, 1)
    :param power: 1 - type II error rate, in (0, 1)
    :param two_sided: Split alpha between both tails
    :return: (t_power, t_alpha)
    """
    for name, value in (("alpha", alpha), ("power", power)):
        value = _check_finite(name, value)
        if not 0.0 < value < 1.0:
            raise ValidationError(f"'{name}' must lie strictly between 0 and 1, got {value}.")
    tail = alpha / 2.0 if two_sided else alpha
    return float(norm.ppf(power)), float(norm.ppf(1.0 - tail))


def simulate_power(effect: float, spec: PowerSpec, replicates: int = 20_000,
                   seed: int = 0) -> PowerSimulation:
    """
    Monte-Carlo rejection rate of a two-sample mean test.

    Each replicate draws ``round(P·N)`` treated and ``N - round(P·N)``
    control outcomes from normals with variance σ², the treated mean
    shifted by ``effect``, and rejects when the two-sided z statistic
    exceeds ``spec.t_alpha``. At the MDE the rate is close to the power
    implied by ``spec.t_power``.
    """
    effect = _check_finite("effect", effect)
    if replicates < 1:
        raise ValidationError(f"'replicates' must be at least 1, got {replicates}.")
    n_treated = int(round(spec.treat_prop * spec.n))
    n_control = spec.n - n_treated
    if n_treated < 1 or n_control < 1:
        raise ValidationError(f"N={spec.n} with P={spec.treat_prop} leaves an empty arm.")

    rng = np.random.default_rng(seed)
    sd = math.sqrt(spec.variance)
    treated = rng.normal(effect, sd, size=(replicates, n_treated)).mean(axis=1)
    control = rng.normal(0.0, sd, size=(replicates, n_control)).mean(axis=1)
    z = (treated - control) / math.sqrt(spec.variance / n_treated + spec.variance / n_control)
    rate = float(np.mean(np.abs(z) > spec.t_alpha))
    logger.debug("simulate_power: effect=%g N=%d rate=%.4f over %d replicates", effect, spec.n, rate, replicates)
    return PowerSimulation(rate, math.sqrt(rate * (1.0 - rate) / replicates), replicates)
