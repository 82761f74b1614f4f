"""
Result bundles and their text, CSV and plot-data renderings.

Text tables keep money in the requested unit (crores by default, two
decimals). The CSV keeps every number in base units (₹, liters) at full
precision so that ``read_results_csv`` gives back exactly what was written.
"""
import json
import logging
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from .errors import ReportIOError, ValidationError
from .helpers import UNIT_FACTORS, to_unit
from .incidence import IncidenceSummary, Species, SurveyRecord, summarize_incidence
from .ingest import LITERS_PER_THOUSAND_TONNES, ParameterDocument
from .logit import LogitFit, MarginEstimate, fit_logit, predictive_margins
from .losses import (
    LossBreakdown,
    PreventionSummary,
    aggregate,
    prevention_economics,
    total_economic_loss,
)
from .oracle import QUANTITY_SYMBOLS, OracleReport
from .surplus import AdoptionPoint, SurplusResult, adoption_sweep, efficiency_gain, pooled_market

logger = logging.getLogger(__name__)

FORMATS = ("text", "csv", "plot")
CSV_COLUMNS = ("scenario", "group", "quantity", "value")
SUM_LABEL = "Total (sum)"
POOLED_LABEL = "Total (pooled)"

LOSS_QUANTITIES = (
    "milk_loss_liters",
    "milk_value_loss",
    "treatment_cost",
    "mortality_loss",
    "total",
    "deaths",
    "morbid",
    "in_milk",
)
SURPLUS_QUANTITIES = ("q0", "q1", "pct_supply_change", "k", "z", "base_price", "success_rate", "delta_ps")
PREVENTION_QUANTITIES = ("in_milk", "total_cost", "total_loss", "cost_to_loss_ratio",
                         "loss_to_cost_ratio", "treatment_to_prevention_ratio")
INCIDENCE_QUANTITIES = ("animals", "cases", "deaths", "morbidity", "mortality", "case_fatality",
                        "awareness", "precaution")

AGGREGATION_NOTE = (
    "Total (sum) adds the group columns. Total (pooled) treats all groups as one herd "
    "with summed counts and averaged yields, prices and costs, which is how a published "
    "single 'Total' column is built; the two totals differ."
)


@dataclass(frozen=True)
class ResultBundle:
    """
    Everything computed for one scenario.

    ``metadata`` holds the scenario name, the input hash, the tool version
    and (unless built deterministically) a UTC timestamp.
    """
    scenario: str
    losses: Tuple[LossBreakdown, ...]
    total_sum: Optional[LossBreakdown] = None
    total_pooled: Optional[LossBreakdown] = None
    prevention: Optional[PreventionSummary] = None
    surplus: Tuple[SurplusResult, ...] = ()
    surplus_pooled: Optional[SurplusResult] = None
    sweep: Tuple[AdoptionPoint, ...] = ()
    sweep_basis: Optional[str] = None
    incidence: Dict[Species, IncidenceSummary] = field(default_factory=dict)
    margins: Dict[str, Tuple[MarginEstimate, ...]] = field(default_factory=dict)
    fit: Optional[LogitFit] = field(default=None, compare=False, repr=False)
    metadata: Dict[str, Optional[str]] = field(default_factory=dict)


def _tool_version() -> str:
    from . import __version__
    return __version__


def build_bundle(document: ParameterDocument, records: Optional[Sequence[SurveyRecord]] = None,
                 deterministic: bool = False) -> ResultBundle:
    """
    Run the loss accounting, the surplus model and the adoption sweep of a
    parameter document, plus the incidence summaries and predictive margins
    of a survey when ``records`` are given.

    Args:
        document: Validated parameter document.
        records: Optional survey records.
        deterministic: Leave the timestamp out of the metadata.

    Returns:
        ResultBundle.
    """
    groups = document.group_parameters()
    losses = {name: total_economic_loss(g) for name, g in groups.items()}
    logger.info("Scenario '%s': losses computed for %d group(s)", document.scenario, len(losses))

    total_sum = total_pooled = None
    if len(losses) > 1:
        total_sum = aggregate(list(losses.values()), mode="sum", label=SUM_LABEL)
        total_pooled = aggregate(list(losses.values()), mode="pooled", label=POOLED_LABEL)

    prevention = None
    if any(g.prevention_cost_per_animal > 0 for g in groups.values()):
        prevention = prevention_economics(list(groups.values()))

    surplus, surplus_pooled = [], None
    if document.market is not None:
        market = document.market
        markets, milk_losses = [], []
        for name, block in market.groups.items():
            m = market.market_for(name, groups[name])
            milk_loss = block.milk_loss_liters
            if milk_loss is None:
                milk_loss = losses[name].milk_loss_liters
            markets.append(m)
            milk_losses.append(milk_loss)
            surplus.append(efficiency_gain(m, milk_loss))
        if len(markets) > 1:
            pooled = market.pooled
            pm = pooled_market(markets, base_price=pooled.price if pooled else None, label=POOLED_LABEL)
            pooled_loss = sum(milk_losses)
            if pooled is not None and pooled.q0_thousand_tonnes is not None:
                pm = replace(pm, base_quantity=pooled.q0_thousand_tonnes * LITERS_PER_THOUSAND_TONNES)
            if pooled is not None and pooled.milk_loss_thousand_tonnes is not None:
                pooled_loss = pooled.milk_loss_thousand_tonnes * LITERS_PER_THOUSAND_TONNES
            surplus_pooled = efficiency_gain(pm, pooled_loss)

    sweep, basis = (), None
    if document.sweep is not None and document.sweep.adoption_rates and surplus:
        basis = document.sweep.basis
        if basis == "pooled" and surplus_pooled is not None:
            full_gain = surplus_pooled.delta_ps
        else:
            basis = "sum"
            full_gain = sum(r.delta_ps for r in surplus)
        sweep = tuple(adoption_sweep(full_gain, document.sweep.adoption_rates))

    incidence, margins, fit = {}, {}, None
    if records:
        present = [sp for sp in (Species.COW, Species.BUFFALO) if any(r.species == sp for r in records)]
        incidence = summarize_incidence(records, present)
        fit = fit_logit(records)
        for factor in ("parity", "species", "cell"):
            margins[factor] = tuple(predictive_margins(fit, records, factor))

    metadata = {
        "scenario": document.scenario,
        "input_hash": document.input_hash,
        "tool_version": _tool_version(),
        "generated_at": None if deterministic else datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return ResultBundle(
        scenario=document.scenario,
        losses=tuple(losses.values()),
        total_sum=total_sum,
        total_pooled=total_pooled,
        prevention=prevention,
        surplus=tuple(surplus),
        surplus_pooled=surplus_pooled,
        sweep=sweep,
        sweep_basis=basis,
        incidence=incidence,
        margins=margins,
        fit=fit,
        metadata=metadata,
    )


################### Text tables #################

def _table(rows: Dict[str, List[str]], columns: Sequence[str]) -> str:
    frame = pd.DataFrame.from_dict(rows, orient="index", columns=list(columns))
    return frame.to_string(justify="right")


def _num(value: Optional[float], digits: int = 2) -> str:
    if value is None:
        return "-"
    if math.isinf(value):
        return "inf"
    return f"{value:,.{digits}f}"


def _money_share(value: float, share: Optional[float], unit: str) -> str:
    text = _num(to_unit(value, unit))
    if share is None:
        return text
    return f"{text} ({share * 100:.2f})"


def render_losses(bundle: ResultBundle, unit: str = "crore") -> str:
    """Loss table: inputs on top, losses below with their per-cent shares."""
    columns = [b.label for b in bundle.losses]
    breakdowns = list(bundle.losses)
    for total in (bundle.total_sum, bundle.total_pooled):
        if total is not None:
            columns.append(total.label)
            breakdowns.append(total)

    def param(getter, digits=2):
        return [_num(getter(b.params), digits) if b.params is not None else "-" for b in breakdowns]

    def opt(name):
        return lambda p: getattr(p, name)

    rows = {
        "T Animals (nos.)": param(opt("total_animals")),
        "P_IM In-milk share": param(opt("prop_in_milk"), 4),
        "A_IM In-milk animals (nos.)": [_num(b.in_milk) for b in breakdowns],
        "P_MF MF incidence": param(lambda p: p.mf_incidence, 4),
        "P_DMF Deaths per in-milk animal": param(lambda p: p.mf_incidence * p.case_fatality, 4),
        "P_D Case fatality": param(lambda p: p.case_fatality, 4),
        "D Deaths (nos.)": [_num(b.deaths) for b in breakdowns],
        "A Cases (nos.)": [_num(b.morbid) for b in breakdowns],
        "Y Daily yield (L/d)": param(opt("daily_yield")),
        "Y_L Lactation yield (L)": param(lambda p: p.lactation_yield),
        "S Survivors per death": param(lambda p: p.survival_ratio),
        "P_MFD Lactation days affected": param(lambda p: p.affected_days_frac, 4),
        "P_MYR Yield lost on affected days": param(lambda p: p.yield_reduction_frac, 4),
        "P Milk price (₹/L)": param(lambda p: p.milk_price),
        "V Animal value (₹)": param(lambda p: p.animal_value),
        "TC Treatment cost per case (₹)": param(lambda p: p.treatment_cost_per_case),
        "Y_LOSS Milk lost (tonnes)": [_num(b.milk_loss_tonnes) for b in breakdowns],
    }
    shares = [b.shares or (None, None, None) for b in breakdowns]
    rows[f"Y_V Value of milk lost ({unit})"] = [
        _money_share(b.milk_value_loss, s[0], unit) for b, s in zip(breakdowns, shares)]
    rows[f"T_C Treatment cost ({unit})"] = [
        _money_share(b.treatment_cost, s[1], unit) for b, s in zip(breakdowns, shares)]
    rows[f"M_L Mortality loss ({unit})"] = [
        _money_share(b.mortality_loss, s[2], unit) for b, s in zip(breakdowns, shares)]
    rows[f"TEL Total economic loss ({unit})"] = [
        _money_share(b.total, 1.0 if b.total else None, unit) for b in breakdowns]
    rows["TEL per in-milk animal (₹)"] = [_num(b.per_animal) for b in breakdowns]

    lines = [f"Economic losses due to milk fever: {bundle.scenario}", "", _table(rows, columns), "",
             "Figures in parentheses are per cent of total economic losses."]
    if bundle.total_pooled is not None:
        lines.append(AGGREGATION_NOTE)
    if bundle.prevention is not None:
        lines += ["", render_prevention(bundle.prevention, unit)]
    return "\n".join(lines) + "\n"


def render_prevention(p: PreventionSummary, unit: str = "crore") -> str:
    return "\n".join([
        "Prevention economics",
        f"  In-milk animals protected       {_num(p.in_milk)}",
        f"  Total prevention cost ({unit})   {_num(to_unit(p.total_cost, unit))}",
        f"  Total economic loss ({unit})     {_num(to_unit(p.total_loss, unit))}",
        f"  Cost / loss                     {_num(p.cost_to_loss_ratio, 4)}",
        f"  Loss / cost                     {_num(p.loss_to_cost_ratio, 2)}",
        f"  Treatment / prevention per head {_num(p.treatment_to_prevention_ratio, 2)}",
    ])


def render_surplus(bundle: ResultBundle, unit: str = "crore") -> str:
    """Market table: elasticities, quantities, K, Z and the efficiency gain."""
    results = list(bundle.surplus)
    if bundle.surplus_pooled is not None:
        results.append(bundle.surplus_pooled)
    if not results:
        return f"No market block in scenario '{bundle.scenario}'.\n"
    rows = {
        "Supply elasticity (e)": [_num(r.supply_elasticity, 3) for r in results],
        "Demand elasticity (|η|)": [_num(r.demand_elasticity_abs, 3) for r in results],
        "Milk loss (000 tonnes)": [_num((r.q1 - r.q0) / LITERS_PER_THOUSAND_TONNES, 3) for r in results],
        "Milk production (000 tonnes)": [_num(r.q0 / LITERS_PER_THOUSAND_TONNES, 3) for r in results],
        "Production without MF (000 tonnes)": [_num(r.q1 / LITERS_PER_THOUSAND_TONNES, 3) for r in results],
        "% change in supply": [_num(r.pct_supply_change, 3) for r in results],
        "Supply shift (K)": [_num(r.k, 3) for r in results],
        "Relative price reduction (Z)": [_num(r.z, 3) for r in results],
        "Price (₹/L)": [_num(r.base_price, 3) for r in results],
        "Success rate": [_num(r.success_rate, 3) for r in results],
        f"Efficiency gain ({unit})": [_num(to_unit(r.delta_ps, unit), 1) for r in results],
    }
    lines = [f"Efficiency gain (producer surplus) if milk fever is prevented: {bundle.scenario}", "",
             _table(rows, [r.label for r in results])]
    return "\n".join(lines) + "\n"


def render_sweep(points: Sequence[AdoptionPoint], unit: str = "crore", basis: Optional[str] = None) -> str:
    if not points:
        return "No adoption rates.\n"
    rows = {f"{p.rate * 100:g}%": [_num(to_unit(p.gain, unit))] for p in points}
    title = "Efficiency gain by adoption rate"
    if basis:
        title += f" ({basis} basis)"
    return "\n".join([title, "", _table(rows, [f"Gain ({unit})"])]) + "\n"


def render_sensitivity(field_name: str, results: Sequence[SurplusResult], unit: str = "crore") -> str:
    rows = {f"{field_name}={getattr(r, field_name):g}": [_num(r.k, 3), _num(r.z, 3), _num(to_unit(r.delta_ps, unit), 1)]
            for r in results}
    return "\n".join([f"Sensitivity of the efficiency gain to {field_name}", "",
                      _table(rows, ["K", "Z", f"Gain ({unit})"])]) + "\n"


def render_incidence(summaries: Dict[Species, IncidenceSummary], descriptive: Optional[dict] = None) -> str:
    """Per-species incidence table, optionally followed by the sample means."""
    order = [s for s in (Species.COW, Species.BUFFALO) if s in summaries]
    rows = {
        "Animals": [str(summaries[s].animals) for s in order],
        "MF cases": [str(summaries[s].cases) for s in order],
        "Deaths": [str(summaries[s].deaths) for s in order],
        "Morbidity (%)": [_num(summaries[s].morbidity * 100) for s in order],
        "Mortality (%)": [_num(summaries[s].mortality * 100) for s in order],
        "Case fatality (%)": [_num(None if summaries[s].case_fatality is None
                                   else summaries[s].case_fatality * 100) for s in order],
        "Aware of MF (%)": [_num(None if summaries[s].awareness is None
                                 else summaries[s].awareness * 100) for s in order],
        "Took precautions (%)": [_num(None if summaries[s].precaution is None
                                      else summaries[s].precaution * 100) for s in order],
    }
    lines = ["Milk fever incidence in the sample", "", _table(rows, [s.value for s in order])]
    if descriptive:
        names = [n for n in ("buffalo", "cow", "combined") if n in descriptive]
        fields = list(next(iter(descriptive.values())).keys())
        rows = {f: [f"{descriptive[n][f].mean:.2f} ({descriptive[n][f].std_err:.2f})" for n in names]
                for f in fields}
        lines += ["", "Sample means (standard errors)", "", _table(rows, names)]
    return "\n".join(lines) + "\n"


def render_margins(fit: LogitFit, margins: Dict[str, Sequence[MarginEstimate]]) -> str:
    """Predictive margins with delta-method standard errors and stars."""
    lines = [
        "Predictive margins of milk fever (logit, parity x species)",
        f"Observations: {fit.n_obs}   Log-likelihood: {fit.log_likelihood:.4f}   "
        f"Iterations: {fit.iterations}",
    ]
    for factor, estimates in margins.items():
        rows = {
            m.level: [f"{m.margin:.4f}{m.stars}", f"{m.std_err:.4f}", _num(m.z, 2), _num(m.p_value, 4)]
            for m in estimates
        }
        lines += ["", f"By {factor}", _table(rows, ["Margin", "Delta-method SE", "z", "P>|z|"])]
    lines += ["", "*** p<0.01, ** p<0.05, * p<0.10"]
    return "\n".join(lines) + "\n"


def render_oracle(report: OracleReport, unit: str = "crore") -> str:
    """Closed form against simulated mean for every loss quantity."""
    def scale(q, v):
        if q == "milk_loss_liters":
            return v
        return to_unit(v, unit)

    rows = {}
    for r in report.rows:
        rows[QUANTITY_SYMBOLS[r.quantity]] = [
            f"{scale(r.quantity, r.closed_form):.6g}",
            f"{scale(r.quantity, r.mc_mean):.6g}",
            f"{scale(r.quantity, r.std_err):.3g}",
            f"{r.z:.2f}",
            "FLAG" if r.flagged else "",
        ]
    lines = [
        f"Monte-Carlo check of '{report.closed_form.label}': {report.result.replicates} replicates, "
        f"{report.result.animals} animals (Y_loss in L, money in {unit})",
        "",
        _table(rows, ["Closed form", "MC mean", "SE", "z", ""]),
        "",
        "all quantities within 3 standard errors" if report.passed
        else f"{len(report.flagged)} quantity(ies) beyond 3 standard errors",
    ]
    return "\n".join(lines) + "\n"


def render_bundle(bundle: ResultBundle, unit: str = "crore") -> str:
    parts = [render_losses(bundle, unit)]
    if bundle.surplus:
        parts.append(render_surplus(bundle, unit))
    if bundle.sweep:
        parts.append(render_sweep(bundle.sweep, unit, bundle.sweep_basis))
    if bundle.incidence:
        parts.append(render_incidence(bundle.incidence))
    if bundle.fit is not None:
        parts.append(render_margins(bundle.fit, bundle.margins))
    return "\n".join(parts)


################### CSV and plot data #################

def result_rows(bundle: ResultBundle) -> List[Tuple[str, str, str, float]]:
    """
    (scenario, group, quantity, value) for every number in the bundle, in
    base units. Undefined values (None, NaN) are left out.
    """
    rows = []

    def add(group, quantity, value):
        if value is None:
            return
        value = float(value)
        if math.isnan(value):
            return
        rows.append((bundle.scenario, group, quantity, value))

    breakdowns = list(bundle.losses) + [b for b in (bundle.total_sum, bundle.total_pooled) if b is not None]
    for b in breakdowns:
        for q in LOSS_QUANTITIES:
            add(b.label, f"loss.{q}", getattr(b, q))
    if bundle.prevention is not None:
        for q in PREVENTION_QUANTITIES:
            add("prevention", f"prevention.{q}", getattr(bundle.prevention, q))
    surplus = list(bundle.surplus) + ([bundle.surplus_pooled] if bundle.surplus_pooled else [])
    for r in surplus:
        for q in SURPLUS_QUANTITIES:
            add(r.label, f"surplus.{q}", getattr(r, q))
    for p in bundle.sweep:
        add("sweep", f"sweep.gain@{p.rate!r}", p.gain)
    for sp, s in bundle.incidence.items():
        for q in INCIDENCE_QUANTITIES:
            add(sp.value, f"incidence.{q}", getattr(s, q))
    for factor, estimates in bundle.margins.items():
        for m in estimates:
            add(f"{factor}={m.level}", "margin.estimate", m.margin)
            add(f"{factor}={m.level}", "margin.std_err", m.std_err)
            add(f"{factor}={m.level}", "margin.p_value", m.p_value)
    return rows


def results_frame(bundle: ResultBundle) -> pd.DataFrame:
    return pd.DataFrame(result_rows(bundle), columns=list(CSV_COLUMNS))


def read_results_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Load a CSV written by ``emit_reports`` without losing precision."""
    try:
        return pd.read_csv(path, dtype={"scenario": str, "group": str, "quantity": str},
                           float_precision="round_trip", keep_default_na=False)
    except OSError as exc:
        raise ReportIOError(f"Cannot read '{path}': {exc}") from exc


def series_tsv(x_name: str, y_name: str, pairs: Iterable[Tuple[float, float]]) -> str:
    """Two-column tab-separated series with a ``#`` header line."""
    lines = [f"# {x_name}\t{y_name}"]
    lines += [f"{x!r}\t{y!r}" for x, y in pairs]
    return "\n".join(lines) + "\n"


def write_text(path: Union[str, Path], content: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ReportIOError(f"Cannot write '{path}': {exc}") from exc
    logger.info("Wrote %s", path)
    return path


def emit_reports(bundle: ResultBundle, out_dir: Union[str, Path], formats: Sequence[str] = FORMATS,
                 unit: str = "crore") -> Dict[str, Path]:
    """
    Write the bundle to ``out_dir``.

    Args:
        bundle: Result bundle.
        out_dir: Destination directory (created if needed).
        formats: Any of "text", "csv", "plot".
        unit: Currency unit of the text table and the plot data.

    Returns:
        Written paths keyed by format, plus "manifest".
    """
    unknown = [f for f in formats if f not in FORMATS]
    if unknown:
        raise ValidationError(f"Unknown format(s) {', '.join(unknown)}. Use {', '.join(FORMATS)}.")
    if unit not in UNIT_FACTORS:
        raise ValidationError(f"Unknown currency unit '{unit}'. Use one of {sorted(UNIT_FACTORS)}.")
    out_dir = Path(out_dir)
    stem = bundle.scenario.replace(" ", "_")
    written, notes = {}, []

    if "text" in formats:
        written["text"] = write_text(out_dir / f"{stem}_report.txt", render_bundle(bundle, unit))
    if "csv" in formats:
        written["csv"] = write_text(out_dir / f"{stem}_results.csv",
                                    results_frame(bundle).to_csv(index=False, lineterminator="\n"))
    if "plot" in formats:
        if bundle.sweep:
            pairs = [(p.rate, to_unit(p.gain, unit)) for p in bundle.sweep]
            written["plot"] = write_text(out_dir / f"{stem}_adoption.tsv",
                                         series_tsv("adoption_rate", f"gain_{unit}", pairs))
        else:
            notes.append("plot-data not written: the scenario has no adoption sweep")
            logger.warning("Scenario '%s' has no adoption sweep; no plot-data file written", bundle.scenario)

    manifest = {
        "metadata": bundle.metadata,
        "unit": unit,
        "csv_units": "rupees and liters",
        "files": {fmt: path.name for fmt, path in written.items()},
        "notes": notes,
    }
    written["manifest"] = write_text(out_dir / "manifest.json",
                                     json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return written
