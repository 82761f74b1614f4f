"""
Monte-Carlo oracle for the closed-form loss accounting.

Every replicate simulates one lactation of the in-milk herd: each animal
contracts milk fever with probability P_MF; a case dies with probability
P_D (the whole lactation Y_L and the animal value V are lost, no treatment
is paid) or survives (Y_L·P_MFD·P_MYR liters lost, TC paid). Per-animal
Bernoulli draws are summed as binomial counts, which has the same
distribution.

Replicates are split into ``stream_count`` batches. Batch ``i`` draws from
``Philox(seed)`` jumped ``i`` times, so each batch is reproducible on its
own and the batches can run in any order or in parallel. Batch statistics
(count, mean, sum of squared deviations) are merged in stream order, which
makes the result bit-identical for a given (seed, stream_count).
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .errors import ValidationError
from .losses import GroupParameters, LossBreakdown, total_economic_loss

logger = logging.getLogger(__name__)

# LossBreakdown attribute names, in report order
QUANTITIES = ("milk_loss_liters", "mortality_loss", "milk_value_loss", "treatment_cost", "total")
QUANTITY_SYMBOLS = {
    "milk_loss_liters": "Y_loss",
    "mortality_loss": "M_L",
    "milk_value_loss": "Y_V",
    "treatment_cost": "T_C",
    "total": "TEL",
}
MAX_REPLICATES = 2 ** 53
CHUNK_SIZE = 1 << 18
Z_THRESHOLD = 3.0


@dataclass(frozen=True)
class SimConfig:
    """
    Attributes:
        group: Parameters of the simulated herd. A fractional ``in_milk``
            is rounded to the nearest whole animal.
        replicates: Number of simulated lactations.
        seed: Seed of the Philox generator, 0 <= seed < 2**64.
        stream_count: Number of independent sub-streams (batches).
    """
    group: GroupParameters
    replicates: int
    seed: int = 42
    stream_count: int = 1

    def __post_init__(self):
        for name in ("replicates", "seed", "stream_count"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"'{name}' must be an integer, got {value!r}.")
        if self.replicates < 1:
            raise ValidationError(f"'replicates' must be at least 1, got {self.replicates}.")
        if self.replicates > MAX_REPLICATES:
            raise ValidationError(
                f"'replicates' ({self.replicates}) exceeds 2**53; float64 accumulators "
                f"would no longer count them exactly."
            )
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError(f"'seed' must fit in 64 unsigned bits, got {self.seed}.")
        if self.stream_count < 1:
            raise ValidationError(f"'stream_count' must be at least 1, got {self.stream_count}.")

    @property
    def animals(self) -> int:
        return int(round(self.group.in_milk))


class Estimate(NamedTuple):
    mean: float
    std_err: float


@dataclass(frozen=True)
class SimResult:
    """
    Sample mean and standard error of every loss quantity, keyed by the
    names in ``QUANTITIES``.
    """
    estimates: Dict[str, Estimate]
    replicates: int
    animals: int

    def __getitem__(self, quantity: str) -> Estimate:
        return self.estimates[quantity]


class _Moments(NamedTuple):
    count: int
    mean: np.ndarray
    m2: np.ndarray


def _merge(a: _Moments, b: _Moments) -> _Moments:
    if a.count == 0:
        return b
    if b.count == 0:
        return a
    count = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / count)
    m2 = a.m2 + b.m2 + delta ** 2 * (a.count * b.count / count)
    return _Moments(count, mean, m2)


def _draw(rng: np.random.Generator, g: GroupParameters, animals: int, size: int) -> np.ndarray:
    """One row per replicate, one column per entry of ``QUANTITIES``."""
    cases = rng.binomial(animals, g.mf_incidence, size=size)
    deaths = rng.binomial(cases, g.case_fatality)
    survivors = cases - deaths
    milk = deaths * g.lactation_yield + survivors * (g.lactation_yield * g.affected_days_frac * g.yield_reduction_frac)
    mortality = deaths * g.animal_value
    milk_value = milk * g.milk_price
    treatment = survivors * g.treatment_cost_per_case
    return np.column_stack([milk, mortality, milk_value, treatment, mortality + milk_value + treatment])


def _batch_sizes(replicates: int, streams: int) -> List[int]:
    base, extra = divmod(replicates, streams)
    return [base + (1 if i < extra else 0) for i in range(streams)]


def _run_stream(cfg: SimConfig, stream: int, size: int) -> _Moments:
    bit_generator = np.random.Philox(cfg.seed)
    if stream:
        bit_generator = bit_generator.jumped(stream)
    rng = np.random.Generator(bit_generator)
    moments = _Moments(0, np.zeros(len(QUANTITIES)), np.zeros(len(QUANTITIES)))
    remaining = size
    while remaining > 0:
        n = min(CHUNK_SIZE, remaining)
        x = _draw(rng, cfg.group, cfg.animals, n)
        mean = x.mean(axis=0)
        moments = _merge(moments, _Moments(n, mean, ((x - mean) ** 2).sum(axis=0)))
        remaining -= n
    logger.debug("stream %d: %d replicates", stream, size)
    return moments


def simulate_herd(cfg: SimConfig, workers: Optional[int] = None) -> SimResult:
    """
    Simulate ``cfg.replicates`` lactations of the herd.

    Args:
        cfg: Simulation configuration.
        workers: Threads used to run the streams. None runs them in the
            calling thread. The result does not depend on it.

    Returns:
        SimResult.
    """
    sizes = _batch_sizes(cfg.replicates, cfg.stream_count)
    logger.info("Simulating %d replicates of %d animals ('%s') on %d stream(s), seed %d",
                cfg.replicates, cfg.animals, cfg.group.label, cfg.stream_count, cfg.seed)
    if workers and workers > 1 and cfg.stream_count > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda args: _run_stream(cfg, *args), enumerate(sizes)))
    else:
        batches = [_run_stream(cfg, i, n) for i, n in enumerate(sizes)]

    total = batches[0]
    for batch in batches[1:]:
        total = _merge(total, batch)

    n = total.count
    if n > 1:
        std_err = np.sqrt(total.m2 / (n - 1) / n)
    else:
        std_err = np.zeros(len(QUANTITIES))
    estimates = {q: Estimate(float(total.mean[i]), float(std_err[i])) for i, q in enumerate(QUANTITIES)}
    return SimResult(estimates=estimates, replicates=n, animals=cfg.animals)


class ComparisonRow(NamedTuple):
    quantity: str
    closed_form: float
    mc_mean: float
    std_err: float
    z: float
    flagged: bool


@dataclass(frozen=True)
class OracleReport:
    result: SimResult
    closed_form: LossBreakdown
    rows: Tuple[ComparisonRow, ...]

    @property
    def flagged(self) -> List[ComparisonRow]:
        return [r for r in self.rows if r.flagged]

    @property
    def passed(self) -> bool:
        return not self.flagged


def _z_score(closed: float, mean: float, std_err: float) -> float:
    if std_err > 0:
        return (mean - closed) / std_err
    if math.isclose(mean, closed, rel_tol=1e-12, abs_tol=1e-9):
        return 0.0
    return math.copysign(math.inf, mean - closed)


def compare_to_closed_form(cfg: SimConfig, closed_form_group: Optional[GroupParameters] = None,
                           workers: Optional[int] = None) -> OracleReport:
    """
    Simulate ``cfg`` and score every quantity against its closed form.

    Args:
        cfg: Simulation configuration.
        closed_form_group: Parameters fed to the closed forms. Defaults to
            ``cfg.group``; passing different parameters injects a fault the
            comparison should catch. Either is evaluated on the rounded
            herd the simulation draws.
        workers: See ``simulate_herd``.

    Returns:
        OracleReport whose rows flag |z| > 3.
    """
    result = simulate_herd(cfg, workers=workers)
    base = closed_form_group if closed_form_group is not None else cfg.group
    if base.in_milk != cfg.animals:
        base = base.scaled(cfg.animals)
    closed = total_economic_loss(base)
    rows = []
    for q in QUANTITIES:
        expected = getattr(closed, q)
        est = result[q]
        z = _z_score(expected, est.mean, est.std_err)
        rows.append(ComparisonRow(q, expected, est.mean, est.std_err, z, abs(z) > Z_THRESHOLD))
    report = OracleReport(result=result, closed_form=closed, rows=tuple(rows))
    for row in report.flagged:
        logger.warning("%s: simulated mean %.6g is %.2f standard errors from the closed form %.6g",
                       QUANTITY_SYMBOLS[row.quantity], row.mc_mean, row.z, row.closed_form)
    return report
