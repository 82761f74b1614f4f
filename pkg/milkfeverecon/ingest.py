"""
Reading of the package inputs: JSON parameter documents, survey CSV files
and the bundled census figures.

Parameter documents are validated by pydantic models that reject unknown
keys; survey rows are parsed one by one and every problem is reported with
its line number before anything reaches the rest of the package.
"""
import hashlib
import io
import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from pydantic import ValidationError as SchemaError

from .errors import ParameterError, ReportIOError, RowError, SurveyError, ValidationError
from .incidence import MAX_PARITY_LEVEL, Species, SurveyRecord
from .losses import LACTATION_DAYS, GroupParameters, derive_lactation_yield, derive_rates
from .surplus import DEFAULT_SUCCESS_RATE, MarketParameters

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
CENSUS_FILE = "census.json"
LITERS_PER_THOUSAND_TONNES = 1e6

SURVEY_COLUMNS = (
    "animal_id",
    "species",
    "parity",
    "mf_case",
    "died",
    "peak_yield_prev",
    "peak_yield_curr",
    "herd_size",
    "green_fodder",
    "dry_fodder",
    "concentrate",
    "mineral_mix",
    "fodder_area",
    "labor",
    "milk_price",
    "animal_value",
    "treatment_cost",
)
OPTIONAL_SURVEY_COLUMNS = ("aware", "precaution")
_BOOLEAN_COLUMNS = ("mf_case", "died")
_FLOAT_COLUMNS = SURVEY_COLUMNS[5:]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class GroupBlock(_Block):
    """
    Inputs of one species group.

    The in-milk population is ``in_milk`` or ``total_animals * prop_in_milk``;
    incidence is given as rates or as ``cases``/``deaths`` counts; the
    lactation yield is given directly or as ``daily_yield`` over
    ``lactation_days``.
    """
    label: Optional[str] = None
    in_milk: Optional[float] = Field(default=None, ge=0)
    total_animals: Optional[float] = Field(default=None, ge=0)
    prop_in_milk: Optional[float] = Field(default=None, ge=0, le=1)
    mf_incidence: Optional[float] = Field(default=None, ge=0, le=1)
    case_fatality: Optional[float] = Field(default=None, ge=0, le=1)
    cases: Optional[float] = Field(default=None, ge=0)
    deaths: Optional[float] = Field(default=None, ge=0)
    lactation_yield: Optional[float] = Field(default=None, ge=0, description="L per lactation")
    daily_yield: Optional[float] = Field(default=None, ge=0, description="L/day")
    lactation_days: float = Field(default=LACTATION_DAYS, gt=0)
    affected_days_frac: float = Field(ge=0, le=1)
    yield_reduction_frac: float = Field(ge=0, le=1)
    milk_price: float = Field(ge=0, description="₹/L")
    animal_value: float = Field(ge=0, description="₹/animal")
    treatment_cost_per_case: float = Field(ge=0, description="₹/case")
    prevention_cost_per_animal: float = Field(default=0.0, ge=0, description="₹/animal")

    @model_validator(mode="after")
    def _alternatives(self):
        if self.in_milk is None and (self.total_animals is None or self.prop_in_milk is None):
            raise ValueError("give 'in_milk' or both 'total_animals' and 'prop_in_milk'")
        rates = self.mf_incidence is not None and self.case_fatality is not None
        counts = self.cases is not None and self.deaths is not None
        if rates == counts:
            raise ValueError("give either 'mf_incidence' and 'case_fatality' or 'cases' and 'deaths'")
        if self.lactation_yield is None and self.daily_yield is None:
            raise ValueError("give 'lactation_yield' or 'daily_yield'")
        return self

    def to_parameters(self, name: str) -> GroupParameters:
        in_milk = self.in_milk
        if in_milk is None:
            in_milk = self.total_animals * self.prop_in_milk
        if self.cases is not None:
            rates = derive_rates(self.cases, self.deaths, in_milk)
            incidence, fatality = rates.mf_incidence, rates.case_fatality
        else:
            incidence, fatality = self.mf_incidence, self.case_fatality
        lactation_yield = self.lactation_yield
        if lactation_yield is None:
            lactation_yield = derive_lactation_yield(self.daily_yield, self.lactation_days)
        return GroupParameters(
            label=self.label or name,
            in_milk=in_milk,
            mf_incidence=incidence,
            case_fatality=fatality,
            lactation_yield=lactation_yield,
            affected_days_frac=self.affected_days_frac,
            yield_reduction_frac=self.yield_reduction_frac,
            milk_price=self.milk_price,
            animal_value=self.animal_value,
            treatment_cost_per_case=self.treatment_cost_per_case,
            prevention_cost_per_animal=self.prevention_cost_per_animal,
            total_animals=self.total_animals,
            prop_in_milk=self.prop_in_milk,
            daily_yield=self.daily_yield,
        )


class MarketGroupBlock(_Block):
    """
    Market of one group. Q0 comes from exactly one of ``q0_thousand_tonnes``,
    ``q0_liters`` or ``q0_days`` (in-milk animals x daily yield x days).
    ``milk_loss_thousand_tonnes`` overrides the milk loss computed by the
    loss accounting; ``price`` overrides the group's milk price.
    """
    q0_thousand_tonnes: Optional[float] = Field(default=None, gt=0)
    q0_liters: Optional[float] = Field(default=None, gt=0)
    q0_days: Optional[float] = Field(default=None, gt=0)
    milk_loss_thousand_tonnes: Optional[float] = Field(default=None, ge=0)
    price: Optional[float] = Field(default=None, gt=0, description="₹/L")

    @model_validator(mode="after")
    def _one_basis(self):
        given = [v for v in (self.q0_thousand_tonnes, self.q0_liters, self.q0_days) if v is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of 'q0_thousand_tonnes', 'q0_liters' or 'q0_days'")
        return self

    def base_quantity(self, group: GroupParameters) -> float:
        if self.q0_thousand_tonnes is not None:
            return self.q0_thousand_tonnes * LITERS_PER_THOUSAND_TONNES
        if self.q0_liters is not None:
            return self.q0_liters
        if group.daily_yield is None:
            raise ValidationError(f"{group.label}: 'q0_days' needs the group's 'daily_yield'.")
        return group.in_milk * group.daily_yield * self.q0_days

    @property
    def milk_loss_liters(self) -> Optional[float]:
        if self.milk_loss_thousand_tonnes is None:
            return None
        return self.milk_loss_thousand_tonnes * LITERS_PER_THOUSAND_TONNES


class PooledMarketBlock(_Block):
    q0_thousand_tonnes: Optional[float] = Field(default=None, gt=0)
    milk_loss_thousand_tonnes: Optional[float] = Field(default=None, ge=0)
    price: Optional[float] = Field(default=None, gt=0)


class MarketBlock(_Block):
    supply_elasticity: float = Field(gt=0)
    demand_elasticity: float = Field(description="signed; only the magnitude is used")
    success_rate: float = Field(default=DEFAULT_SUCCESS_RATE, ge=0, le=1)
    groups: Dict[str, MarketGroupBlock] = Field(min_length=1)
    pooled: Optional[PooledMarketBlock] = None

    @field_validator("demand_elasticity")
    @classmethod
    def _nonzero(cls, v: float) -> float:
        if v == 0:
            raise ValueError("demand elasticity must be nonzero")
        return v

    @property
    def demand_elasticity_abs(self) -> float:
        return abs(self.demand_elasticity)

    def market_for(self, name: str, group: GroupParameters) -> MarketParameters:
        block = self.groups[name]
        return MarketParameters(
            supply_elasticity=self.supply_elasticity,
            demand_elasticity_abs=self.demand_elasticity_abs,
            base_price=block.price if block.price is not None else group.milk_price,
            base_quantity=block.base_quantity(group),
            success_rate=self.success_rate,
            label=group.label,
        )


class SweepBlock(_Block):
    adoption_rates: List[float] = Field(default_factory=list)
    basis: Literal["pooled", "sum"] = "pooled"

    @field_validator("adoption_rates")
    @classmethod
    def _fractions(cls, v: List[float]) -> List[float]:
        for rate in v:
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"adoption rate {rate} is not in [0, 1]")
        return v


class ParameterDocument(_Block):
    """
    One self-contained scenario.

    ``input_hash`` is the sha256 of the document's canonical JSON form (sorted
    keys, no whitespace), so it ignores formatting and key order.
    """
    scenario: str = Field(min_length=1)
    description: Optional[str] = None
    groups: Dict[str, GroupBlock] = Field(min_length=1)
    market: Optional[MarketBlock] = None
    sweep: Optional[SweepBlock] = None
    provenance: Dict[str, str] = Field(default_factory=dict)

    _input_hash: str = PrivateAttr(default="")
    _source: str = PrivateAttr(default="")

    @model_validator(mode="after")
    def _market_groups_known(self):
        if self.market is not None:
            unknown = [name for name in self.market.groups if name not in self.groups]
            if unknown:
                raise ValueError(f"market refers to unknown group(s): {', '.join(unknown)}")
        if self.sweep is not None and self.sweep.adoption_rates and self.market is None:
            raise ValueError("an adoption sweep needs a market block")
        return self

    @property
    def input_hash(self) -> str:
        return self._input_hash

    @property
    def source(self) -> str:
        return self._source

    def group_parameters(self) -> Dict[str, GroupParameters]:
        """GroupParameters of every group, in document order."""
        out = {}
        for name, block in self.groups.items():
            try:
                out[name] = block.to_parameters(name)
            except ValidationError as exc:
                raise ParameterError(self._source or self.scenario, [f"groups.{name}: {exc}"]) from exc
        return out


def canonical_hash(raw: dict) -> str:
    """sha256 of ``raw`` serialized with sorted keys and no whitespace."""
    text = json.dumps(raw, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _issues(exc: SchemaError) -> List[str]:
    issues = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<document>"
        issues.append(f"{path}: {err['msg']}")
    return issues


def resolve_data_path(path: Union[str, Path]) -> Path:
    """
    ``path`` itself when it exists, otherwise the bundled file of that name.
    """
    path = Path(path)
    if path.exists():
        return path
    bundled = DATA_DIR / path.name
    if bundled.exists():
        logger.info("Using bundled %s", bundled.name)
        return bundled
    raise ReportIOError(f"No such file: '{path}'.")


def _read_utf8(path: Path) -> str:
    """
    Text of ``path``. A file that cannot be opened is an I/O failure;
    bytes that are not UTF-8 raise UnicodeDecodeError for the caller to
    report as bad content.
    """
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ReportIOError(f"Cannot read '{path}': {exc}") from exc
    return data.decode("utf-8-sig")


def _undecodable(exc: UnicodeDecodeError) -> RowError:
    line = exc.object.count(b"\n", 0, exc.start) + 1
    return RowError(line, "", f"not valid UTF-8 ({exc.reason}, byte 0x{exc.object[exc.start]:02x})")


def parse_parameters(raw: dict, source: str = "<memory>") -> ParameterDocument:
    """Validate an already decoded parameter document."""
    if not isinstance(raw, dict):
        raise ParameterError(source, ["<document>: top level must be an object"])
    try:
        doc = ParameterDocument.model_validate(raw)
    except SchemaError as exc:
        raise ParameterError(source, _issues(exc)) from None
    doc._input_hash = canonical_hash(raw)
    doc._source = source
    # surface inconsistencies (in_milk vs T·P_IM, counts) at load time
    doc.group_parameters()
    return doc


def read_parameters(path: Union[str, Path]) -> ParameterDocument:
    """
    Load and validate a JSON parameter document.

    Args:
        path: Document path, or the name of a bundled document
            (e.g. ``haryana.params``).

    Returns:
        ParameterDocument with defaults applied.
    """
    path = resolve_data_path(path)
    try:
        raw = json.loads(_read_utf8(path))
    except UnicodeDecodeError as exc:
        raise ParameterError(str(path), [f"<document>: {_undecodable(exc)}"]) from None
    except json.JSONDecodeError as exc:
        raise ParameterError(str(path), [f"<document>: invalid JSON at line {exc.lineno}: {exc.msg}"]) from None
    doc = parse_parameters(raw, str(path))
    logger.info("Loaded scenario '%s' from %s (%d group(s))", doc.scenario, path, len(doc.groups))
    return doc


def _parse_bool(value: str) -> bool:
    if value == "1":
        return True
    if value == "0":
        return False
    raise ValueError(f"expected 0 or 1, got {value!r}")


def _parse_float(value: str) -> float:
    number = float(value)
    if not math.isfinite(number):
        raise ValueError(f"{value!r} is not finite")
    if number < 0:
        raise ValueError(f"{value!r} is negative")
    return number


def _parse_int(value: str) -> int:
    number = int(value)
    if number < 0:
        raise ValueError(f"{value!r} is negative")
    return number


def _cell(row: Dict[str, str], column: str) -> str:
    # short rows come back as NaN even with dtype=str
    value = row[column]
    return value.strip() if isinstance(value, str) else ""


def _parse_row(row: Dict[str, str], line: int, optional: List[str]):
    values, errors = {}, []

    def parse(column, parser):
        try:
            values[column] = parser(_cell(row, column))
        except ValueError as exc:
            errors.append(RowError(line, column, str(exc)))

    values["animal_id"] = _cell(row, "animal_id")
    if not values["animal_id"]:
        errors.append(RowError(line, "animal_id", "empty animal_id"))
    parse("species", lambda v: Species(v.lower()))
    parse("parity", _parse_int)
    for column in _BOOLEAN_COLUMNS:
        parse(column, _parse_bool)
    for column in _FLOAT_COLUMNS:
        parse(column, _parse_float)
    for column in optional:
        if _cell(row, column) != "":
            parse(column, _parse_bool)
    if errors:
        return None, errors
    try:
        return SurveyRecord(**values), []
    except ValidationError as exc:
        message = str(exc).split(": ", 1)[-1]
        return None, [RowError(line, "", message)]


def read_survey_csv(path: Union[str, Path]) -> List[SurveyRecord]:
    """
    Parse and validate a survey CSV.

    The header must name every column of ``SURVEY_COLUMNS``; ``aware`` and
    ``precaution`` are recognized when present and other columns are ignored
    with a warning. Booleans are 0/1.

    Raises:
        SurveyError: with one RowError per problem (line numbers count the
            header as line 1) when any row is rejected.
    """
    path = resolve_data_path(path)
    source = str(path)
    try:
        text = _read_utf8(path)
    except UnicodeDecodeError as exc:
        raise SurveyError(source, [_undecodable(exc)]) from None
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise SurveyError(source, [RowError(1, "", "file is empty (no header row)")]) from None

    missing = [c for c in SURVEY_COLUMNS if c not in frame.columns]
    if missing:
        raise SurveyError(source, [RowError(1, c, "missing column") for c in missing])
    optional = [c for c in OPTIONAL_SURVEY_COLUMNS if c in frame.columns]
    extra = [c for c in frame.columns if c not in SURVEY_COLUMNS and c not in optional]
    if extra:
        logger.warning("%s: ignoring extra column(s) %s", path.name, ", ".join(extra))

    records, errors, seen = [], [], {}
    for idx, row in enumerate(frame.to_dict(orient="records")):
        line = idx + 2
        record, row_errors = _parse_row(row, line, optional)
        errors.extend(row_errors)
        if record is None:
            continue
        if record.animal_id in seen:
            errors.append(RowError(line, "animal_id",
                                   f"duplicate animal_id {record.animal_id!r} (first on line {seen[record.animal_id]})"))
            continue
        seen[record.animal_id] = line
        records.append(record)
    if errors:
        raise SurveyError(source, errors)

    binned = sum(r.parity > MAX_PARITY_LEVEL for r in records)
    if binned:
        logger.warning("%s: %d record(s) with parity above %d binned to %d",
                       path.name, binned, MAX_PARITY_LEVEL, MAX_PARITY_LEVEL)
    logger.info("Read %d survey records from %s", len(records), path)
    return records


class CensusEntry(_Block):
    total_animals: float = Field(ge=0)
    prop_in_milk: float = Field(ge=0, le=1)
    daily_yield: float = Field(ge=0, description="L/day")
    milk_production_thousand_tonnes: Optional[float] = Field(default=None, gt=0)

    @property
    def in_milk(self) -> float:
        return self.total_animals * self.prop_in_milk


class Census(_Block):
    region: str
    year: int
    groups: Dict[str, CensusEntry]
    sources: Dict[str, str] = Field(default_factory=dict)


def load_census(path: Optional[Union[str, Path]] = None) -> Census:
    """
    Census population, in-milk share and daily yield per species group.

    Args:
        path: Census JSON. Defaults to the bundled file.
    """
    path = resolve_data_path(path if path is not None else DATA_DIR / CENSUS_FILE)
    try:
        raw = json.loads(_read_utf8(path))
    except UnicodeDecodeError as exc:
        raise ParameterError(str(path), [f"<document>: {_undecodable(exc)}"]) from None
    except json.JSONDecodeError as exc:
        raise ParameterError(str(path), [f"<document>: invalid JSON at line {exc.lineno}: {exc.msg}"]) from None
    try:
        return Census.model_validate(raw)
    except SchemaError as exc:
        raise ParameterError(str(path), _issues(exc)) from None
