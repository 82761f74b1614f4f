"""
Open-economy economic surplus of preventing milk fever.

Preventing the disease shifts milk supply out by the milk it currently
destroys. With no demand restriction the whole welfare gain accrues to
producers:

    %Δq = (Q1 - Q0) / Q0,   Q1 = Q0 + Y_loss
    K   = %Δq / e
    Z   = K·e / (e + η)
    ΔPS = K·P0·Q0·(1 + 0.5·Z·e) · success_rate

K is the proportional quantity gain over the supply elasticity. The
inverted form e / %Δq cannot reproduce any published K and is not offered.
"""
import logging
from dataclasses import dataclass, replace
from typing import Iterable, List, NamedTuple, Optional, Sequence

from .errors import ValidationError
from .helpers import _check_fraction, _check_fractions, _check_nonnegative, _check_positive

logger = logging.getLogger(__name__)

DEFAULT_SUCCESS_RATE = 0.9
SENSITIVITY_FIELDS = ("supply_elasticity", "demand_elasticity_abs", "base_price", "success_rate")


@dataclass(frozen=True)
class MarketParameters:
    """
    Market of one group (or of the pooled state).

    Attributes:
        supply_elasticity: e > 0.
        demand_elasticity_abs: η > 0, absolute value of the demand elasticity.
        base_price: P0, ₹/L.
        base_quantity: Q0, L/year.
        success_rate: Share of treated animals in which prevention works.
    """
    supply_elasticity: float
    demand_elasticity_abs: float
    base_price: float
    base_quantity: float
    success_rate: float = DEFAULT_SUCCESS_RATE
    label: str = ""

    def __post_init__(self):
        _check_positive("supply_elasticity", self.supply_elasticity)
        _check_positive("demand_elasticity_abs", self.demand_elasticity_abs)
        _check_positive("base_price", self.base_price)
        _check_positive("base_quantity", self.base_quantity)
        _check_fraction("success_rate", self.success_rate)


@dataclass(frozen=True)
class SurplusResult:
    """
    Efficiency gain of one market.

    ``delta_ps`` is in ₹/year and equals the change in total surplus under
    the open-economy assumption.
    """
    label: str
    q0: float
    q1: float
    pct_supply_change: float
    k: float
    z: float
    delta_ps: float
    base_price: float
    success_rate: float
    supply_elasticity: float
    demand_elasticity_abs: float


class AdoptionPoint(NamedTuple):
    rate: float
    gain: float


def counterfactual_supply(q0: float, milk_loss: float) -> float:
    """Q1 = Q0 + Y_loss, the supply if milk fever were fully prevented."""
    q0 = _check_positive("q0", q0)
    milk_loss = _check_nonnegative("milk_loss", milk_loss)
    return q0 + milk_loss


def supply_shift_k(q0: float, q1: float, supply_elasticity: float) -> float:
    """
    Vertical supply shift relative to the initial price.

    Args:
        q0: Initial quantity.
        q1: Quantity without the disease (q1 >= q0).
        supply_elasticity: e.

    Returns:
        K = ((q1 - q0) / q0) / e.
    """
    q0 = _check_positive("q0", q0)
    if supply_elasticity == 0:
        raise ValidationError("supply_elasticity is 0: a vertical supply curve cannot shift.")
    supply_elasticity = _check_positive("supply_elasticity", supply_elasticity)
    if q1 < q0:
        raise ValidationError(f"q1 ({q1:g}) is below q0 ({q0:g}); prevention cannot reduce supply.")
    return ((q1 - q0) / q0) / supply_elasticity


def price_reduction_z(k: float, supply_elasticity: float, demand_elasticity_abs: float) -> float:
    """Z = K·e/(e+η), relative fall of the equilibrium price."""
    denominator = supply_elasticity + demand_elasticity_abs
    if denominator <= 0:
        raise ValidationError("supply_elasticity + demand_elasticity_abs must be greater than 0.")
    return k * supply_elasticity / denominator


def producer_surplus(m: MarketParameters, k: float, z: float) -> float:
    """ΔPS = K·P0·Q0·(1 + 0.5·Z·e)·success_rate, ₹/year."""
    return k * m.base_price * m.base_quantity * (1.0 + 0.5 * z * m.supply_elasticity) * m.success_rate


def efficiency_gain(m: MarketParameters, milk_loss: float, label: Optional[str] = None) -> SurplusResult:
    """
    Full surplus computation for a market that would recover ``milk_loss``
    liters a year.
    """
    q1 = counterfactual_supply(m.base_quantity, milk_loss)
    k = supply_shift_k(m.base_quantity, q1, m.supply_elasticity)
    z = price_reduction_z(k, m.supply_elasticity, m.demand_elasticity_abs)
    gain = producer_surplus(m, k, z)
    result = SurplusResult(
        label=label if label is not None else m.label,
        q0=m.base_quantity,
        q1=q1,
        pct_supply_change=(q1 - m.base_quantity) / m.base_quantity,
        k=k,
        z=z,
        delta_ps=gain,
        base_price=m.base_price,
        success_rate=m.success_rate,
        supply_elasticity=m.supply_elasticity,
        demand_elasticity_abs=m.demand_elasticity_abs,
    )
    logger.debug("%s: K=%.4f Z=%.4f ΔPS=%.4g", result.label, k, z, gain)
    return result


def pooled_market(markets: Sequence[MarketParameters], base_price: Optional[float] = None,
                  label: str = "Total (pooled)") -> MarketParameters:
    """
    Pooled market: summed Q0 and, unless given, the simple mean of the group
    prices. Elasticities and success rate must agree across groups.
    """
    markets = list(markets)
    if not markets:
        raise ValidationError("pooled_market needs at least one market.")
    first = markets[0]
    for m in markets[1:]:
        if (m.supply_elasticity, m.demand_elasticity_abs, m.success_rate) != (
                first.supply_elasticity, first.demand_elasticity_abs, first.success_rate):
            raise ValidationError("Pooled markets must share elasticities and success rate.")
    if base_price is None:
        base_price = sum(m.base_price for m in markets) / len(markets)
    return MarketParameters(
        supply_elasticity=first.supply_elasticity,
        demand_elasticity_abs=first.demand_elasticity_abs,
        base_price=base_price,
        base_quantity=sum(m.base_quantity for m in markets),
        success_rate=first.success_rate,
        label=label,
    )


def adoption_sweep(full_gain: float, rates: Iterable[float]) -> List[AdoptionPoint]:
    """
    Gain at each adoption rate, scaled linearly from the full-adoption gain.

    :param full_gain: ΔPS at 100% adoption (already at the success rate)
    :param rates: Adoption rates in [0, 1]
    :return: List of (rate, gain)
    """
    full_gain = _check_nonnegative("full_gain", full_gain)
    arr = _check_fractions("rates", rates)
    return [AdoptionPoint(float(r), float(r) * full_gain) for r in arr]


def sensitivity_sweep(m: MarketParameters, milk_loss: float, field: str,
                      values: Iterable[float]) -> List[SurplusResult]:
    """
    Recompute the efficiency gain with one market field varied.

    Args:
        m: Base market.
        milk_loss: Liters recovered by prevention.
        field: One of ``SENSITIVITY_FIELDS``.
        values: Values taken by the field.
    """
    if field not in SENSITIVITY_FIELDS:
        raise ValidationError(f"Cannot vary '{field}'. Choose one of {', '.join(SENSITIVITY_FIELDS)}.")
    results = []
    for v in values:
        varied = replace(m, **{field: float(v)})
        results.append(efficiency_gain(varied, milk_loss, label=f"{m.label} {field}={v:g}".strip()))
    return results
