import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import CRORE, random_group
from milkfeverecon.errors import ValidationError
from milkfeverecon.losses import (
    GroupParameters,
    aggregate,
    derive_lactation_yield,
    derive_rates,
    milk_production_loss,
    milk_value_loss,
    mortality_loss,
    pooled_parameters,
    prevention_economics,
    total_economic_loss,
    treatment_cost,
)


def group(**overrides):
    values = dict(
        label="cows", in_milk=1000.0, mf_incidence=0.2, case_fatality=0.1,
        lactation_yield=3000.0, affected_days_frac=0.02, yield_reduction_frac=0.8,
        milk_price=30.0, animal_value=50000.0, treatment_cost_per_case=2500.0,
    )
    values.update(overrides)
    return GroupParameters(**values)


################### Published state columns #################

@pytest.mark.parametrize("name, m_l, t_c", [
    ("cows", 35.35, 26.74),
    ("buffaloes", 282.36, 72.17),
])
def test_mortality_and_treatment_match_published(haryana_groups, name, m_l, t_c):
    g = haryana_groups[name]
    assert mortality_loss(g) / CRORE == pytest.approx(m_l, rel=0.005)
    assert treatment_cost(g) / CRORE == pytest.approx(t_c, rel=0.005)


@pytest.mark.parametrize("name, tonnes, y_v, tel", [
    ("cows", 22674.61, 68.02, 130.11),
    ("buffaloes", 124377.44, 559.70, 914.23),
])
def test_milk_and_total_losses_match_published(haryana_groups, name, tonnes, y_v, tel):
    b = total_economic_loss(haryana_groups[name])
    assert b.milk_loss_tonnes == pytest.approx(tonnes, rel=0.05)
    assert b.milk_value_loss / CRORE == pytest.approx(y_v, rel=0.05)
    assert b.total / CRORE == pytest.approx(tel, rel=0.05)


def test_haryana_in_milk_population(haryana_groups):
    assert haryana_groups["cows"].in_milk == pytest.approx(354490.19, abs=0.01)
    assert haryana_groups["buffaloes"].in_milk == pytest.approx(1990986.48, abs=0.01)
    assert haryana_groups["cows"].morbid == pytest.approx(99399.05, rel=1e-4)
    assert haryana_groups["buffaloes"].morbid == pytest.approx(379282.92, rel=1e-4)


@pytest.mark.parametrize("name, tonnes", [("cows", 7.72), ("buffaloes", 6.15)])
def test_sample_milk_loss(sample_groups, name, tonnes):
    assert total_economic_loss(sample_groups[name]).milk_loss_tonnes == pytest.approx(tonnes, rel=0.05)


def test_lactation_yield_from_daily_yield():
    assert derive_lactation_yield(8.92) == pytest.approx(2720.6)
    assert derive_lactation_yield(9.11) == pytest.approx(2778.55)
    assert derive_lactation_yield(10.0, lactation_days=300) == 3000.0
    with pytest.raises(ValidationError):
        derive_lactation_yield(10.0, lactation_days=0)
    with pytest.raises(ValidationError):
        derive_lactation_yield(-1.0)


################### Rates #################

def test_derive_rates_from_sample_counts():
    r = derive_rates(30, 2, 107)
    assert r.mf_incidence == pytest.approx(0.2804, abs=5e-5)
    assert r.case_fatality == pytest.approx(0.0667, abs=5e-5)
    assert r.death_rate == pytest.approx(2 / 107)
    assert r.survival_ratio == 14.0
    assert not r.survival_infinite


def test_derive_rates_without_deaths_flags_infinite_survival():
    r = derive_rates(5, 0, 100)
    assert r.case_fatality == 0.0
    assert math.isinf(r.survival_ratio)
    assert r.survival_infinite


def test_derive_rates_without_cases():
    r = derive_rates(0, 0, 100)
    assert r.mf_incidence == 0.0
    assert r.case_fatality == 0.0


@pytest.mark.parametrize("morbid, deaths, in_milk", [
    (10, 11, 100),      # more deaths than cases
    (101, 1, 100),      # more cases than animals
    (1, 0, 0),          # empty population
    (-1, 0, 10),
])
def test_derive_rates_rejects_inconsistent_counts(morbid, deaths, in_milk):
    with pytest.raises(ValidationError):
        derive_rates(morbid, deaths, in_milk)


def test_derive_rates_recover_counts():
    rng = np.random.default_rng(5)
    cases = [(30, 2, 107), (20, 2, 105), (0, 0, 50), (7, 7, 7)]
    for _ in range(300):
        n = int(rng.integers(1, 5000))
        m = int(rng.integers(0, n + 1))
        cases.append((m, int(rng.integers(0, m + 1)), n))
    for m, d, n in cases:
        r = derive_rates(m, d, n)
        g = group(in_milk=n, mf_incidence=r.mf_incidence, case_fatality=r.case_fatality)
        assert g.morbid == pytest.approx(m, rel=1e-12, abs=1e-9)
        assert g.deaths == pytest.approx(d, rel=1e-12, abs=1e-9)
        assert g.deaths + g.survivors == pytest.approx(g.morbid, rel=1e-12, abs=1e-9)


################### Parameter validation #################

@pytest.mark.parametrize("field, value", [
    ("milk_price", -1.0),
    ("mf_incidence", 1.2),
    ("case_fatality", -0.1),
    ("lactation_yield", float("nan")),
    ("animal_value", float("inf")),
    ("in_milk", "1000"),
    ("treatment_cost_per_case", True),
])
def test_group_rejects_invalid_values(field, value):
    with pytest.raises(ValidationError, match=rf"'cows\.{field}'"):
        group(**{field: value})


def test_group_checks_population_consistency():
    group(in_milk=730.0, total_animals=1000.0, prop_in_milk=0.73)
    with pytest.raises(ValidationError, match="disagrees"):
        group(in_milk=800.0, total_animals=1000.0, prop_in_milk=0.73)


def test_survival_ratio():
    assert group(case_fatality=0.2).survival_ratio == pytest.approx(4.0)
    assert math.isinf(group(case_fatality=0.0).survival_ratio)


def test_scaled_keeps_rates():
    g = group(total_animals=5000.0, prop_in_milk=0.2)
    s = g.scaled(10.0)
    assert s.in_milk == 10.0
    assert s.total_animals is None
    assert (s.mf_incidence, s.case_fatality, s.milk_price) == (g.mf_incidence, g.case_fatality, g.milk_price)


################### Edge cases #################

def test_no_deaths_loses_only_survivor_milk():
    g = group(case_fatality=0.0)
    expected = g.in_milk * g.mf_incidence * g.lactation_yield * g.affected_days_frac * g.yield_reduction_frac
    assert milk_production_loss(g) == pytest.approx(expected, rel=1e-12)
    assert mortality_loss(g) == 0.0
    assert treatment_cost(g) == pytest.approx(g.in_milk * g.mf_incidence * g.treatment_cost_per_case)


def test_all_cases_die():
    g = group(case_fatality=1.0)
    assert milk_production_loss(g) == pytest.approx(g.in_milk * g.mf_incidence * g.lactation_yield)
    assert treatment_cost(g) == 0.0


def test_no_incidence_means_no_losses():
    b = total_economic_loss(group(mf_incidence=0.0))
    assert b.total == 0.0
    assert b.milk_loss_liters == 0.0
    assert b.shares is None
    assert b.per_animal == 0.0


def test_empty_herd():
    b = total_economic_loss(group(in_milk=0.0))
    assert b.total == 0.0
    assert b.per_animal is None


def test_shares_sum_to_one(haryana_groups):
    b = total_economic_loss(haryana_groups["buffaloes"])
    assert sum(b.shares) == pytest.approx(1.0)
    milk_share, treatment_share, mortality_share = b.shares
    assert milk_share == pytest.approx(b.milk_value_loss / b.total)
    assert mortality_share == pytest.approx(b.mortality_loss / b.total)


################### Properties #################

def test_total_is_sum_of_components_on_random_draws():
    rng = np.random.default_rng(20210520)
    for _ in range(10_000):
        g = random_group(rng)
        b = total_economic_loss(g)
        parts = mortality_loss(g) + milk_value_loss(g) + treatment_cost(g)
        assert b.total == pytest.approx(parts, rel=1e-6, abs=1e-9)
        assert b.total >= 0.0
        assert b.milk_loss_liters <= g.in_milk * g.mf_incidence * g.lactation_yield * (1 + 1e-12)


def test_stable_form_equals_survival_form():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        g = replace(random_group(rng), case_fatality=float(rng.uniform(0.01, 1.0)))
        survival_form = (g.in_milk * g.mf_incidence * g.lactation_yield * g.case_fatality
                         * (1.0 + g.survival_ratio * g.affected_days_frac * g.yield_reduction_frac))
        assert milk_production_loss(g) == pytest.approx(survival_form, rel=1e-12, abs=1e-9)


@pytest.mark.parametrize("field", [
    "mf_incidence", "lactation_yield", "affected_days_frac", "yield_reduction_frac", "in_milk",
])
def test_milk_loss_never_drops_when_an_input_rises(field):
    rng = np.random.default_rng(17)
    for _ in range(1000):
        g = random_group(rng)
        value = getattr(g, field)
        if field in ("lactation_yield", "in_milk"):
            raised = value * float(rng.uniform(1.0, 3.0)) + float(rng.uniform(0.0, 10.0))
        else:
            raised = min(1.0, value + (1.0 - value) * float(rng.uniform()))
        assert milk_production_loss(replace(g, **{field: raised})) >= milk_production_loss(g)


def test_money_scales_with_prices():
    rng = np.random.default_rng(11)
    for _ in range(500):
        g = replace(random_group(rng), prevention_cost_per_animal=float(rng.uniform(0, 1000)))
        c = float(rng.uniform(0.1, 10.0))
        scaled = replace(g, milk_price=g.milk_price * c, animal_value=g.animal_value * c,
                         treatment_cost_per_case=g.treatment_cost_per_case * c,
                         prevention_cost_per_animal=g.prevention_cost_per_animal * c)
        a, b = total_economic_loss(g), total_economic_loss(scaled)
        assert b.total == pytest.approx(a.total * c, rel=1e-12, abs=1e-9)
        assert b.milk_loss_liters == a.milk_loss_liters

        pa, pb = prevention_economics([g]), prevention_economics([scaled])
        assert pb.total_cost == pytest.approx(pa.total_cost * c, rel=1e-12, abs=1e-9)
        for name in ("cost_to_loss_ratio", "loss_to_cost_ratio", "treatment_to_prevention_ratio"):
            before, after = getattr(pa, name), getattr(pb, name)
            if before is None:
                assert after is None
            else:
                assert after == pytest.approx(before, rel=1e-9)


def test_losses_are_linear_in_herd_size():
    g = group()
    a, b = total_economic_loss(g), total_economic_loss(g.scaled(3 * g.in_milk))
    for name in ("milk_loss_liters", "mortality_loss", "milk_value_loss", "treatment_cost", "total"):
        assert getattr(b, name) == pytest.approx(3 * getattr(a, name), rel=1e-12)


################### Aggregation #################

def test_sum_aggregation_adds_groups(haryana_groups):
    parts = [total_economic_loss(g) for g in haryana_groups.values()]
    total = aggregate(parts, mode="sum", label="Total")
    for name in ("milk_loss_liters", "mortality_loss", "milk_value_loss", "treatment_cost", "total", "in_milk"):
        assert getattr(total, name) == pytest.approx(sum(getattr(p, name) for p in parts), rel=1e-12)
    assert total.label == "Total"
    assert total.params is None


def test_pooled_aggregation_differs_from_sum(haryana_groups):
    parts = [total_economic_loss(g) for g in haryana_groups.values()]
    summed = aggregate(parts, mode="sum")
    pooled = aggregate(parts, mode="pooled")
    assert pooled.in_milk == pytest.approx(summed.in_milk)
    assert pooled.morbid == pytest.approx(summed.morbid)
    assert pooled.deaths == pytest.approx(summed.deaths)
    assert pooled.total != pytest.approx(summed.total, rel=1e-3)


def test_pooled_parameters_means_and_weights(haryana_groups):
    cows, buffaloes = haryana_groups["cows"], haryana_groups["buffaloes"]
    p = pooled_parameters([cows, buffaloes])
    assert p.milk_price == pytest.approx(37.5)
    assert p.animal_value == pytest.approx((53333 + 74250) / 2)
    weighted = (cows.lactation_yield * cows.in_milk + buffaloes.lactation_yield * buffaloes.in_milk) / p.in_milk
    assert p.lactation_yield == pytest.approx(weighted)
    assert p.mf_incidence == pytest.approx((cows.morbid + buffaloes.morbid) / p.in_milk)


def test_aggregate_single_group_is_identity():
    b = total_economic_loss(group())
    assert aggregate([b]) is b


def test_aggregate_rejects_bad_input():
    b = total_economic_loss(group())
    with pytest.raises(ValidationError):
        aggregate([])
    with pytest.raises(ValidationError):
        aggregate([b, b], mode="mean")
    summed = aggregate([b, b])
    with pytest.raises(ValidationError):
        aggregate([summed, b], mode="pooled")


################### Prevention #################

def test_prevention_cost_and_ratio(haryana_groups):
    p = prevention_economics(list(haryana_groups.values()))
    assert p.in_milk == pytest.approx(2345476.67, abs=0.01)
    assert p.total_cost / CRORE == pytest.approx(126.7, abs=0.5)
    assert p.loss_to_cost_ratio == pytest.approx(7.9, rel=0.05)
    assert p.cost_to_loss_ratio == pytest.approx(1 / p.loss_to_cost_ratio)
    # treatment is several times dearer than prevention per animal
    assert 4.0 < p.treatment_to_prevention_ratio < 6.0


def test_prevention_against_published_total(haryana_groups):
    p = prevention_economics(list(haryana_groups.values()), total_loss=999.91 * CRORE)
    assert p.loss_to_cost_ratio == pytest.approx(7.89, abs=0.01)


def test_prevention_cost_override(haryana_groups):
    groups = list(haryana_groups.values())
    p = prevention_economics(groups, cost_per_animal=100.0)
    assert p.total_cost == pytest.approx(100.0 * sum(g.in_milk for g in groups))


def test_prevention_ratios_undefined(caplog):
    g = group(mf_incidence=0.0, prevention_cost_per_animal=540.0)
    p = prevention_economics([g])
    assert p.total_loss == 0.0
    assert p.cost_to_loss_ratio is None
    assert p.loss_to_cost_ratio == 0.0
    assert "undefined" in caplog.text

    free = prevention_economics([group()], cost_per_animal=0.0)
    assert free.loss_to_cost_ratio is None
    assert free.treatment_to_prevention_ratio is None
