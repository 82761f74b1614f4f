"""
Survey records and their summaries: incidence, mortality and case fatality
per species, descriptive means of the production variables, and the sample column of the
loss accounting built straight from the survey.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .helpers import _safe_ratio
from .losses import LACTATION_DAYS, GroupParameters, derive_lactation_yield, derive_rates

logger = logging.getLogger(__name__)

MAX_PARITY_LEVEL = 5
PARITY_LEVELS = (2, 3, 4, 5)


class Species(str, Enum):
    BUFFALO = "buffalo"
    COW = "cow"


@dataclass(frozen=True)
class SurveyRecord:
    """
    One surveyed animal, previous lactation.

    ``aware`` and ``precaution`` are None when the survey file does not
    carry them.
    """
    animal_id: str
    species: Species
    parity: int
    mf_case: bool
    died: bool
    peak_yield_prev: float
    peak_yield_curr: float
    herd_size: float
    green_fodder: float
    dry_fodder: float
    concentrate: float
    mineral_mix: float
    fodder_area: float
    labor: float
    milk_price: float
    animal_value: float
    treatment_cost: float
    aware: Optional[bool] = None
    precaution: Optional[bool] = None

    def __post_init__(self):
        if self.died and not self.mf_case:
            raise ValidationError(f"animal {self.animal_id}: death without recorded MF case")
        if self.parity < 2:
            raise ValidationError(f"animal {self.animal_id}: parity must be at least 2, got {self.parity}")

    @property
    def parity_level(self) -> int:
        """Parity binned to 2, 3, 4 or 5 (5 stands for 5+)."""
        return min(self.parity, MAX_PARITY_LEVEL)


# Descriptive variables, in print order
DESCRIPTIVE_FIELDS = (
    "parity",
    "peak_yield_prev",
    "peak_yield_curr",
    "herd_size",
    "green_fodder",
    "dry_fodder",
    "concentrate",
    "mineral_mix",
    "fodder_area",
    "labor",
)


@dataclass(frozen=True)
class IncidenceSummary:
    """
    Incidence, mortality and awareness of one species.

    ``case_fatality`` is None when there are no cases; awareness and
    precaution are None when the survey does not record them.
    """
    species: Species
    animals: int
    cases: int
    deaths: int
    morbidity: float
    mortality: float
    case_fatality: Optional[float]
    awareness: Optional[float] = None
    precaution: Optional[float] = None


def _by_species(records: Iterable[SurveyRecord], species: Species) -> List[SurveyRecord]:
    return [r for r in records if r.species == species]


def _optional_rate(values: Sequence[Optional[bool]]) -> Optional[float]:
    known = [v for v in values if v is not None]
    if not known or len(known) != len(values):
        return None
    return sum(known) / len(known)


def summarize_incidence(records: Sequence[SurveyRecord],
                        species: Sequence[Species] = (Species.COW, Species.BUFFALO)) -> Dict[Species, IncidenceSummary]:
    """
    Morbidity, mortality and case fatality per species.

    Args:
        records: Survey records.
        species: Species to summarize; each must have at least one record.

    Returns:
        Dict species -> IncidenceSummary.
    """
    out = {}
    for sp in species:
        sp = Species(sp)
        group = _by_species(records, sp)
        if not group:
            raise ValidationError(f"No survey records for species '{sp.value}'.")
        cases = sum(r.mf_case for r in group)
        deaths = sum(r.died for r in group)
        out[sp] = IncidenceSummary(
            species=sp,
            animals=len(group),
            cases=cases,
            deaths=deaths,
            morbidity=cases / len(group),
            mortality=deaths / len(group),
            case_fatality=_safe_ratio(deaths, cases),
            awareness=_optional_rate([r.aware for r in group]),
            precaution=_optional_rate([r.precaution for r in group]),
        )
    return out


@dataclass(frozen=True)
class DescriptiveStat:
    mean: float
    std_err: float
    n: int


def describe_sample(records: Sequence[SurveyRecord]) -> Dict[str, Dict[str, DescriptiveStat]]:
    """
    Mean and standard error of every production variable, per species and
    combined.

    Returns:
        ``{"buffalo": {...}, "cow": {...}, "combined": {...}}``; inner keys
        are the names in ``DESCRIPTIVE_FIELDS``.
    """
    if not records:
        raise ValidationError("describe_sample needs at least one record.")
    groups = {sp.value: _by_species(records, sp) for sp in Species}
    groups["combined"] = list(records)
    out = {}
    for name, group in groups.items():
        if not group:
            continue
        stats = {}
        for fieldname in DESCRIPTIVE_FIELDS:
            values = np.array([getattr(r, fieldname) for r in group], dtype=float)
            se = values.std(ddof=1) / np.sqrt(len(values)) if len(values) > 1 else 0.0
            stats[fieldname] = DescriptiveStat(float(values.mean()), float(se), len(values))
        out[name] = stats
    return out


def sample_group(records: Sequence[SurveyRecord], species: Species, daily_yield: float,
                 affected_days_frac: float, yield_reduction_frac: float,
                 lactation_days: float = LACTATION_DAYS, label: Optional[str] = None) -> GroupParameters:
    """
    Loss-accounting inputs of the surveyed animals of one species.

    Incidence and case fatality come from the survey counts; milk price and
    animal value are survey means; treatment cost is the mean over treated
    survivors. Every surveyed animal is in milk.
    """
    species = Species(species)
    group = _by_species(records, species)
    if not group:
        raise ValidationError(f"No survey records for species '{species.value}'.")
    cases = sum(r.mf_case for r in group)
    deaths = sum(r.died for r in group)
    rates = derive_rates(cases, deaths, len(group))
    treated = [r.treatment_cost for r in group if r.mf_case and not r.died]
    return GroupParameters(
        label=label or species.value,
        in_milk=float(len(group)),
        mf_incidence=rates.mf_incidence,
        case_fatality=rates.case_fatality,
        lactation_yield=derive_lactation_yield(daily_yield, lactation_days),
        affected_days_frac=affected_days_frac,
        yield_reduction_frac=yield_reduction_frac,
        milk_price=float(np.mean([r.milk_price for r in group])),
        animal_value=float(np.mean([r.animal_value for r in group])),
        treatment_cost_per_case=float(np.mean(treated)) if treated else 0.0,
        total_animals=float(len(group)),
        prop_in_milk=1.0,
        daily_yield=daily_yield,
    )
