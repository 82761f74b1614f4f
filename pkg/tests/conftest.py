import numpy as np
import pytest

from milkfeverecon.incidence import Species, SurveyRecord
from milkfeverecon.ingest import DATA_DIR, read_parameters, read_survey_csv
from milkfeverecon.losses import GroupParameters
from milkfeverecon.surplus import MarketParameters

HARYANA = DATA_DIR / "haryana.params"
SAMPLE = DATA_DIR / "sample.params"
SURVEY = DATA_DIR / "survey_sample.csv"

CRORE = 1e7
THOUSAND_TONNES = 1e6        # liters


@pytest.fixture(scope="session")
def haryana_doc():
    return read_parameters(HARYANA)


@pytest.fixture(scope="session")
def haryana_groups(haryana_doc):
    return haryana_doc.group_parameters()


@pytest.fixture(scope="session")
def sample_groups():
    return read_parameters(SAMPLE).group_parameters()


@pytest.fixture(scope="session")
def survey_records():
    return read_survey_csv(SURVEY)


@pytest.fixture
def cows_market():
    return MarketParameters(0.019, 1.035, 30.0, 252.390 * THOUSAND_TONNES, 0.9, "cows")


@pytest.fixture
def buffaloes_market():
    return MarketParameters(0.019, 1.035, 45.0, 948.194 * THOUSAND_TONNES, 0.9, "buffaloes")


def random_group(rng: np.random.Generator, label: str = "g") -> GroupParameters:
    """Valid GroupParameters drawn over wide ranges, including zero rates."""
    def frac():
        return float(rng.choice([0.0, 1.0, rng.uniform()], p=[0.05, 0.05, 0.9]))

    return GroupParameters(
        label=label,
        in_milk=float(rng.uniform(0, 1e6)),
        mf_incidence=frac(),
        case_fatality=frac(),
        lactation_yield=float(rng.uniform(0, 6000)),
        affected_days_frac=frac(),
        yield_reduction_frac=frac(),
        milk_price=float(rng.uniform(0, 80)),
        animal_value=float(rng.uniform(0, 150000)),
        treatment_cost_per_case=float(rng.uniform(0, 5000)),
    )


def make_record(animal_id, species, parity, mf_case, died=False, **extra) -> SurveyRecord:
    values = dict(
        peak_yield_prev=12.0, peak_yield_curr=12.5, herd_size=5, green_fodder=20.0,
        dry_fodder=12.0, concentrate=3.7, mineral_mix=0.03, fodder_area=0.6, labor=2,
        milk_price=40.0, animal_value=60000.0, treatment_cost=2000.0 if mf_case and not died else 0.0,
    )
    values.update(extra)
    return SurveyRecord(str(animal_id), Species(species), parity, mf_case, died, **values)


def cell_records(cells):
    """
    Records from {(parity, species): (cases, n)}; cases come first in
    every cell.
    """
    records, k = [], 0
    for (parity, species), (cases, n) in cells.items():
        for j in range(n):
            records.append(make_record(k, species, parity, j < cases))
            k += 1
    return records
