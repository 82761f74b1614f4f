"""
Milk-fever loss accounting: quantity of milk lost, the three monetary loss
components (mortality, milk value, treatment), their aggregation and the
cost of prevention.

All money is in base ₹ and all milk in liters. Conversion to crores, lakhs
or tonnes only happens at reporting time.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Optional, Sequence, Tuple

from .errors import ValidationError
from .helpers import (
    LITERS_PER_TONNE,
    _check_fraction,
    _check_nonnegative,
    _check_positive,
    _safe_ratio,
)

logger = logging.getLogger(__name__)

LACTATION_DAYS = 305
AggregationMode = Literal["sum", "pooled"]


@dataclass(frozen=True)
class RateSummary:
    """
    Rates derived from raw counts of an in-milk population.

    Attributes:
        mf_incidence: P_MF, cases per in-milk animal.
        case_fatality: P_D, deaths per case (0 when there are no cases).
        death_rate: P_DMF, deaths per in-milk animal.
        survival_ratio: S, survivors per death. ``math.inf`` when nobody died.
        survival_infinite: Flag for the previous case.
    """
    mf_incidence: float
    case_fatality: float
    death_rate: float
    survival_ratio: float
    survival_infinite: bool


def derive_rates(morbid: float, deaths: float, in_milk: float) -> RateSummary:
    """
    Incidence, case fatality and survival ratio from counts.

    Args:
        morbid: Number of milk-fever cases (A).
        deaths: Number of deaths among cases (D).
        in_milk: In-milk population (A_IM).

    Returns:
        RateSummary.
    """
    in_milk = _check_positive("in_milk", in_milk)
    morbid = _check_nonnegative("morbid", morbid)
    deaths = _check_nonnegative("deaths", deaths)
    if deaths > morbid:
        raise ValidationError(f"deaths ({deaths:g}) exceeds morbid ({morbid:g}).")
    if morbid > in_milk:
        raise ValidationError(f"morbid ({morbid:g}) exceeds in_milk ({in_milk:g}).")

    case_fatality = deaths / morbid if morbid > 0 else 0.0
    if deaths > 0:
        survival, infinite = (morbid - deaths) / deaths, False
    else:
        survival, infinite = math.inf, True
    return RateSummary(
        mf_incidence=morbid / in_milk,
        case_fatality=case_fatality,
        death_rate=deaths / in_milk,
        survival_ratio=survival,
        survival_infinite=infinite,
    )


@dataclass(frozen=True)
class GroupParameters:
    """
    Epidemiological and production inputs for one species group.

    Attributes:
        label: Group name ("cows", "buffaloes", ...).
        in_milk: A_IM, in-milk animals. May be fractional.
        mf_incidence: P_MF.
        case_fatality: P_D.
        lactation_yield: Y_L, liters per lactation.
        affected_days_frac: P_MFD, share of lactation days affected in survivors.
        yield_reduction_frac: P_MYR, share of daily yield lost on affected days.
        milk_price: P, ₹/L.
        animal_value: V, ₹/animal.
        treatment_cost_per_case: TC, vet fee plus medicine, ₹/case.
        prevention_cost_per_animal: ₹/animal for a preventive diet.
        total_animals: T, optional.
        prop_in_milk: P_IM, optional.
        daily_yield: Y, L/day, optional (display only once Y_L is known).
    """
    label: str
    in_milk: float
    mf_incidence: float
    case_fatality: float
    lactation_yield: float
    affected_days_frac: float
    yield_reduction_frac: float
    milk_price: float
    animal_value: float
    treatment_cost_per_case: float
    prevention_cost_per_animal: float = 0.0
    total_animals: Optional[float] = None
    prop_in_milk: Optional[float] = None
    daily_yield: Optional[float] = None

    def __post_init__(self):
        for name in ("in_milk", "lactation_yield", "milk_price", "animal_value",
                     "treatment_cost_per_case", "prevention_cost_per_animal"):
            object.__setattr__(self, name, _check_nonnegative(f"{self.label}.{name}", getattr(self, name)))
        for name in ("mf_incidence", "case_fatality", "affected_days_frac", "yield_reduction_frac"):
            object.__setattr__(self, name, _check_fraction(f"{self.label}.{name}", getattr(self, name)))
        if self.total_animals is not None:
            _check_nonnegative(f"{self.label}.total_animals", self.total_animals)
        if self.prop_in_milk is not None:
            _check_fraction(f"{self.label}.prop_in_milk", self.prop_in_milk)
        if self.daily_yield is not None:
            _check_nonnegative(f"{self.label}.daily_yield", self.daily_yield)
        if self.total_animals is not None and self.prop_in_milk is not None:
            expected = self.total_animals * self.prop_in_milk
            if abs(expected - self.in_milk) > 0.5:
                raise ValidationError(
                    f"{self.label}: in_milk ({self.in_milk:g}) disagrees with "
                    f"total_animals * prop_in_milk ({expected:g}) by more than 0.5."
                )

    @property
    def survival_ratio(self) -> float:
        """S = 1/P_D - 1; ``math.inf`` when P_D is 0. Display only."""
        if self.case_fatality == 0:
            return math.inf
        return 1.0 / self.case_fatality - 1.0

    @property
    def morbid(self) -> float:
        return self.in_milk * self.mf_incidence

    @property
    def deaths(self) -> float:
        return self.morbid * self.case_fatality

    @property
    def survivors(self) -> float:
        return self.morbid * (1.0 - self.case_fatality)

    def scaled(self, in_milk: float) -> "GroupParameters":
        """Same rates and prices on a population of ``in_milk`` animals."""
        return replace(self, in_milk=in_milk, total_animals=None, prop_in_milk=None)


def derive_lactation_yield(daily_yield: float, lactation_days: float = LACTATION_DAYS) -> float:
    """
    Lactation yield Y_L from the average daily yield.

    :param daily_yield: L/day (>= 0)
    :param lactation_days: Days in milk per lactation (> 0), 305 by default
    :return: Liters per lactation
    """
    daily_yield = _check_nonnegative("daily_yield", daily_yield)
    lactation_days = _check_positive("lactation_days", lactation_days)
    return daily_yield * lactation_days


def milk_production_loss(g: GroupParameters) -> float:
    """
    Yearly milk lost to milk fever, in liters.

    Uses A_IM·P_MF·Y_L·[P_D + (1-P_D)·P_MFD·P_MYR], the form of
    A_IM·P_MF·Y_L·P_D·[1 + S·P_MFD·P_MYR] that stays defined at P_D = 0.
    Dead animals forfeit the whole lactation; survivors lose P_MYR of their
    yield on P_MFD of their days.
    """
    per_case = g.case_fatality + (1.0 - g.case_fatality) * g.affected_days_frac * g.yield_reduction_frac
    return g.in_milk * g.mf_incidence * g.lactation_yield * per_case


def mortality_loss(g: GroupParameters) -> float:
    """Market value of the animals that die, ₹."""
    return g.in_milk * g.mf_incidence * g.case_fatality * g.animal_value


def milk_value_loss(g: GroupParameters) -> float:
    """Value of the milk lost at the group's milk price, ₹."""
    return milk_production_loss(g) * g.milk_price


def treatment_cost(g: GroupParameters) -> float:
    """Treatment spent on cases that survive, ₹."""
    return g.in_milk * g.mf_incidence * (1.0 - g.case_fatality) * g.treatment_cost_per_case


@dataclass(frozen=True)
class LossBreakdown:
    """
    Milk and monetary losses of one group, or of an aggregate of groups.

    ``params`` keeps the inputs the breakdown was computed from (None for a
    sum of groups).
    """
    label: str
    milk_loss_liters: float
    mortality_loss: float
    milk_value_loss: float
    treatment_cost: float
    total: float
    deaths: float
    morbid: float
    in_milk: float
    params: Optional[GroupParameters] = field(default=None, compare=False, repr=False)

    @property
    def milk_loss_tonnes(self) -> float:
        return self.milk_loss_liters / LITERS_PER_TONNE

    @property
    def shares(self) -> Optional[Tuple[float, float, float]]:
        """
        (milk value, treatment, mortality) shares of TEL, in report row
        order. None when TEL is 0.
        """
        if self.total == 0:
            return None
        return (
            self.milk_value_loss / self.total,
            self.treatment_cost / self.total,
            self.mortality_loss / self.total,
        )

    @property
    def per_animal(self) -> Optional[float]:
        return _safe_ratio(self.total, self.in_milk)


def total_economic_loss(g: GroupParameters) -> LossBreakdown:
    """
    TEL = M_L + Y_V + T_C for one group.

    Args:
        g: Validated group parameters.

    Returns:
        LossBreakdown with every component and its inputs.
    """
    milk = milk_production_loss(g)
    m_l = mortality_loss(g)
    y_v = milk * g.milk_price
    t_c = treatment_cost(g)
    logger.debug("%s: Y_loss=%.2f L, M_L=%.2f, Y_V=%.2f, T_C=%.2f", g.label, milk, m_l, y_v, t_c)
    return LossBreakdown(
        label=g.label,
        milk_loss_liters=milk,
        mortality_loss=m_l,
        milk_value_loss=y_v,
        treatment_cost=t_c,
        total=m_l + y_v + t_c,
        deaths=g.deaths,
        morbid=g.morbid,
        in_milk=g.in_milk,
        params=g,
    )


def pooled_parameters(groups: Sequence[GroupParameters], label: str = "Total (pooled)") -> GroupParameters:
    """
    Pooled parameters in the manner of the published "Total" column.

    Counts (in-milk animals, cases, deaths) are summed and rates are
    recomputed from them. Lactation yield is the in-milk weighted mean; milk
    price, animal value, treatment cost, P_MFD, P_MYR and prevention cost
    are simple means over groups, as the published column prints them.
    """
    if not groups:
        raise ValidationError("pooled_parameters needs at least one group.")
    n = len(groups)
    in_milk = sum(g.in_milk for g in groups)
    morbid = sum(g.morbid for g in groups)
    deaths = sum(g.deaths for g in groups)

    def mean(name: str) -> float:
        return sum(getattr(g, name) for g in groups) / n

    if in_milk > 0:
        lactation_yield = sum(g.lactation_yield * g.in_milk for g in groups) / in_milk
    else:
        lactation_yield = mean("lactation_yield")
    totals = [g.total_animals for g in groups]
    return GroupParameters(
        label=label,
        in_milk=in_milk,
        mf_incidence=morbid / in_milk if in_milk > 0 else 0.0,
        case_fatality=deaths / morbid if morbid > 0 else 0.0,
        lactation_yield=lactation_yield,
        affected_days_frac=mean("affected_days_frac"),
        yield_reduction_frac=mean("yield_reduction_frac"),
        milk_price=mean("milk_price"),
        animal_value=mean("animal_value"),
        treatment_cost_per_case=mean("treatment_cost_per_case"),
        prevention_cost_per_animal=mean("prevention_cost_per_animal"),
        total_animals=sum(totals) if None not in totals else None,
    )


def aggregate(groups: Sequence[LossBreakdown], mode: AggregationMode = "sum",
              label: Optional[str] = None) -> LossBreakdown:
    """
    Combine per-group breakdowns.

    Args:
        groups: One or more LossBreakdown.
        mode: "sum" adds the components of every group (default). "pooled"
            recomputes the losses from ``pooled_parameters`` of the groups'
            inputs, for comparison with the published "Total" column.
        label: Label of the result.

    Returns:
        LossBreakdown of the aggregate.
    """
    groups = list(groups)
    if not groups:
        raise ValidationError("aggregate needs at least one group.")
    if len(groups) == 1:
        return groups[0]

    if mode == "pooled":
        params = [b.params for b in groups]
        if any(p is None for p in params):
            raise ValidationError("pooled aggregation needs breakdowns computed from GroupParameters.")
        return total_economic_loss(pooled_parameters(params, label or "Total (pooled)"))
    if mode != "sum":
        raise ValidationError(f"Unknown aggregation mode '{mode}'. Use 'sum' or 'pooled'.")

    m_l = sum(b.mortality_loss for b in groups)
    y_v = sum(b.milk_value_loss for b in groups)
    t_c = sum(b.treatment_cost for b in groups)
    return LossBreakdown(
        label=label or "Total",
        milk_loss_liters=sum(b.milk_loss_liters for b in groups),
        mortality_loss=m_l,
        milk_value_loss=y_v,
        treatment_cost=t_c,
        total=m_l + y_v + t_c,
        deaths=sum(b.deaths for b in groups),
        morbid=sum(b.morbid for b in groups),
        in_milk=sum(b.in_milk for b in groups),
    )


@dataclass(frozen=True)
class PreventionSummary:
    """
    Cost of feeding a preventive diet to every in-milk animal against the
    losses it would avoid. Ratios are None when undefined.
    """
    in_milk: float
    total_cost: float
    total_loss: float
    cost_to_loss_ratio: Optional[float]
    loss_to_cost_ratio: Optional[float]
    treatment_to_prevention_ratio: Optional[float]


def prevention_economics(groups: Sequence[GroupParameters], cost_per_animal: Optional[float] = None,
                         total_loss: Optional[float] = None) -> PreventionSummary:
    """
    Prevention cost and its ratio to total economic losses.

    Args:
        groups: Groups to protect.
        cost_per_animal: ₹/animal. When None each group's own
            ``prevention_cost_per_animal`` is used.
        total_loss: TEL to compare against. Defaults to the sum-of-groups TEL.

    Returns:
        PreventionSummary.
    """
    groups = list(groups)
    if not groups:
        raise ValidationError("prevention_economics needs at least one group.")
    if cost_per_animal is not None:
        cost_per_animal = _check_nonnegative("cost_per_animal", cost_per_animal)
        costs = [cost_per_animal] * len(groups)
    else:
        costs = [g.prevention_cost_per_animal for g in groups]

    in_milk = sum(g.in_milk for g in groups)
    total_cost = sum(g.in_milk * c for g, c in zip(groups, costs))
    if total_loss is None:
        total_loss = aggregate([total_economic_loss(g) for g in groups]).total
    else:
        total_loss = _check_nonnegative("total_loss", total_loss)

    mean_tc = sum(g.treatment_cost_per_case for g in groups) / len(groups)
    mean_cost = sum(costs) / len(costs)
    summary = PreventionSummary(
        in_milk=in_milk,
        total_cost=total_cost,
        total_loss=total_loss,
        cost_to_loss_ratio=_safe_ratio(total_cost, total_loss),
        loss_to_cost_ratio=_safe_ratio(total_loss, total_cost),
        treatment_to_prevention_ratio=_safe_ratio(mean_tc, mean_cost),
    )
    if summary.cost_to_loss_ratio is None:
        logger.warning("Total economic loss is 0; cost-to-loss ratio is undefined.")
    return summary

