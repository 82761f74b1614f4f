"""
Command line: ``milkfever <subcommand> ...`` or ``python -m milkfeverecon``.

Results go to stdout (or to files under ``--out-dir``), logs to stderr.
Exit status: 0 on success, 1 for invalid input, 2 for a failed
computation, 3 for an I/O problem.
"""
import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .errors import MilkFeverError, ValidationError
from .helpers import UNIT_FACTORS, to_unit
from .incidence import describe_sample, summarize_incidence
from .ingest import read_parameters, read_survey_csv
from .logit import FACTORS, fit_logit, predictive_margins
from .oracle import SimConfig, compare_to_closed_form
from .power import PowerSpec, minimum_detectable_effect, required_sample_size, simulate_power
from .reports import (
    FORMATS,
    build_bundle,
    emit_reports,
    render_bundle,
    render_incidence,
    render_losses,
    render_margins,
    render_oracle,
    render_sensitivity,
    render_surplus,
    render_sweep,
    results_frame,
    series_tsv,
    write_text,
)
from .surplus import SENSITIVITY_FIELDS, MarketParameters, adoption_sweep, sensitivity_sweep

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "MILKFEVER_OUTPUT_DIR"


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the validation status."""
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class CommandSpec:
    subcommand: str
    inputs: Sequence[str] = ()
    out_dir: Optional[Path] = None
    formats: Sequence[str] = ("text",)
    unit: str = "crore"
    deterministic: bool = False
    seed: Optional[int] = None
    verbosity: int = 0
    options: dict = field(default_factory=dict)


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _vary(text: str):
    name, _, values = text.partition("=")
    if name not in SENSITIVITY_FIELDS or not values:
        raise argparse.ArgumentTypeError(
            f"expected FIELD=v1,v2,... with FIELD in {', '.join(SENSITIVITY_FIELDS)}, got {text!r}")
    return name, _float_list(values)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out-dir", type=Path, default=os.environ.get(OUTPUT_DIR_ENV) or None,
                        help=f"write files here instead of stdout (default: ${OUTPUT_DIR_ENV})")
    common.add_argument("--format", dest="formats", action="append", choices=FORMATS,
                        help="text, csv or plot; repeat for several (default: text)")
    common.add_argument("--unit", choices=sorted(UNIT_FACTORS), default="crore", help="currency unit")
    common.add_argument("--deterministic", action="store_true", help="omit timestamps from outputs")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    parser = _Parser(prog="milkfever", description="Milk fever losses, efficiency gains and incidence statistics")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("losses", parents=[common], help="loss accounting per group and in total")
    p.add_argument("params", help="parameter document (JSON) or bundled name")

    p = sub.add_parser("surplus", parents=[common], help="efficiency gain if milk fever is prevented")
    p.add_argument("params")

    p = sub.add_parser("sweep", parents=[common], help="efficiency gain by adoption rate or sensitivity")
    p.add_argument("params")
    p.add_argument("--rates", type=_float_list, help="comma-separated adoption rates in [0, 1]")
    p.add_argument("--vary", type=_vary, metavar="FIELD=v1,v2", help="vary one market field instead")

    p = sub.add_parser("margins", parents=[common], help="logit predictive margins")
    p.add_argument("survey", help="survey CSV or bundled name")
    p.add_argument("--factor", choices=FACTORS, action="append", help="parity, species or cell (default: all)")

    p = sub.add_parser("incidence", parents=[common], help="incidence, mortality and case fatality")
    p.add_argument("survey")
    p.add_argument("--describe", action="store_true", help="add sample means and standard errors")

    p = sub.add_parser("power", parents=[common], help="minimum detectable effect or sample size")
    p.add_argument("--alpha", type=float, default=1.96, help="significance quantile t_alpha")
    p.add_argument("--power", type=float, default=0.84, help="power quantile t_power")
    p.add_argument("--p", type=float, default=0.5, dest="treat_prop", help="treated share")
    p.add_argument("--var", type=float, default=1.0, dest="variance", help="outcome variance")
    p.add_argument("--n", type=int, default=None, help="total sample size")
    p.add_argument("--effect", type=float, default=None, help="target effect; prints the required N")
    p.add_argument("--simulate", type=int, default=0, metavar="REPLICATES",
                   help="cross-check the MDE with a simulated two-sample test")
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo check of the closed forms")
    p.add_argument("params")
    p.add_argument("--group", help="group name (default: first)")
    p.add_argument("--replicates", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--streams", type=int, default=1)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--scale-to", type=float, default=None, metavar="ANIMALS",
                   help="simulate this many in-milk animals with the group's rates")
    p.add_argument("--strict", action="store_true", help="exit 2 when a quantity is flagged")

    p = sub.add_parser("report", parents=[common], help="every table of a scenario, written to files")
    p.add_argument("params")
    p.add_argument("--survey", help="survey CSV for incidence and margins")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _emit(spec: CommandSpec, name: str, outputs: dict) -> None:
    """
    ``outputs`` maps a format to (suffix, content). Content goes to stdout
    without an output directory, otherwise to ``<out_dir>/<name><suffix>``.
    """
    for fmt in spec.formats:
        if fmt not in outputs:
            logger.warning("'%s' has no %s output", spec.subcommand, fmt)
            continue
        suffix, content = outputs[fmt]
        if spec.out_dir is None:
            sys.stdout.write(content)
        else:
            write_text(spec.out_dir / f"{name}{suffix}", content)


def _losses(spec: CommandSpec) -> int:
    bundle = build_bundle(read_parameters(spec.inputs[0]), deterministic=spec.deterministic)
    frame = results_frame(bundle)
    frame = frame[frame["quantity"].str.match(r"(loss|prevention)\.")]
    _emit(spec, f"{bundle.scenario}_losses", {
        "text": (".txt", render_losses(bundle, spec.unit)),
        "csv": (".csv", frame.to_csv(index=False, lineterminator="\n")),
    })
    return 0


def _surplus(spec: CommandSpec) -> int:
    bundle = build_bundle(read_parameters(spec.inputs[0]), deterministic=spec.deterministic)
    if not bundle.surplus:
        raise ValidationError(f"Scenario '{bundle.scenario}' has no market block.")
    frame = results_frame(bundle)
    frame = frame[frame["quantity"].str.match(r"surplus\.")]
    _emit(spec, f"{bundle.scenario}_surplus", {
        "text": (".txt", render_surplus(bundle, spec.unit)),
        "csv": (".csv", frame.to_csv(index=False, lineterminator="\n")),
    })
    return 0


def _sweep(spec: CommandSpec) -> int:
    document = read_parameters(spec.inputs[0])
    bundle = build_bundle(document, deterministic=spec.deterministic)
    if not bundle.surplus:
        raise ValidationError(f"Scenario '{bundle.scenario}' has no market block.")
    basis = document.sweep.basis if document.sweep is not None else "pooled"
    if basis == "pooled" and bundle.surplus_pooled is not None:
        base = bundle.surplus_pooled
    else:
        basis = "sum"
        base = None

    vary = spec.options.get("vary")
    if vary is not None:
        field_name, values = vary
        base = base or bundle.surplus[0]
        market = MarketParameters(base.supply_elasticity, base.demand_elasticity_abs, base.base_price,
                                  base.q0, base.success_rate, base.label)
        results = sensitivity_sweep(market, base.q1 - base.q0, field_name, values)
        _emit(spec, f"{bundle.scenario}_{field_name}", {
            "text": (".txt", render_sensitivity(field_name, results, spec.unit)),
            "plot": (".tsv", series_tsv(field_name, f"gain_{spec.unit}",
                                        [(v, to_unit(r.delta_ps, spec.unit)) for v, r in zip(values, results)])),
            "csv": (".csv", f"{field_name},gain_rupees\n"
                    + "".join(f"{v!r},{r.delta_ps!r}\n" for v, r in zip(values, results))),
        })
        return 0

    rates = spec.options.get("rates")
    if rates is not None:
        full_gain = base.delta_ps if base is not None else sum(r.delta_ps for r in bundle.surplus)
        points = adoption_sweep(full_gain, rates)
    else:
        points = list(bundle.sweep)
    _emit(spec, f"{bundle.scenario}_adoption", {
        "text": (".txt", render_sweep(points, spec.unit, basis)),
        "plot": (".tsv", series_tsv("adoption_rate", f"gain_{spec.unit}",
                                    [(p.rate, to_unit(p.gain, spec.unit)) for p in points])),
        "csv": (".csv", "adoption_rate,gain_rupees\n" + "".join(f"{p.rate!r},{p.gain!r}\n" for p in points)),
    })
    return 0


def _margins(spec: CommandSpec) -> int:
    records = read_survey_csv(spec.inputs[0])
    fit = fit_logit(records)
    factors = spec.options.get("factors") or FACTORS
    margins = {f: predictive_margins(fit, records, f) for f in factors}
    rows = ["factor,level,margin,std_err,z,p_value"]
    rows += [f"{f},{m.level},{m.margin!r},{m.std_err!r},{m.z!r},{m.p_value!r}"
             for f, estimates in margins.items() for m in estimates]
    _emit(spec, "margins", {
        "text": (".txt", render_margins(fit, margins)),
        "csv": (".csv", "\n".join(rows) + "\n"),
    })
    return 0


def _incidence(spec: CommandSpec) -> int:
    records = read_survey_csv(spec.inputs[0])
    present = sorted({r.species for r in records}, key=lambda s: s.value, reverse=True)
    summaries = summarize_incidence(records, present)
    descriptive = describe_sample(records) if spec.options.get("describe") else None
    rows = ["species,animals,cases,deaths,morbidity,mortality,case_fatality"]
    rows += [f"{s.species.value},{s.animals},{s.cases},{s.deaths},{s.morbidity!r},{s.mortality!r},"
             f"{'' if s.case_fatality is None else repr(s.case_fatality)}" for s in summaries.values()]
    _emit(spec, "incidence", {
        "text": (".txt", render_incidence(summaries, descriptive)),
        "csv": (".csv", "\n".join(rows) + "\n"),
    })
    return 0


def _power(spec: CommandSpec) -> int:
    o = spec.options
    lines = []
    if o.get("effect") is not None:
        n = required_sample_size(o["effect"], o["power"], o["alpha"], o["treat_prop"], o["variance"])
        lines.append(f"Required sample size N: {n}")
        csv = f"target_effect,n\n{o['effect']!r},{n}\n"
    else:
        if o.get("n") is None:
            raise UsageError("power: give --n for the minimum detectable effect or --effect for the sample size")
        pspec = PowerSpec(o["power"], o["alpha"], o["treat_prop"], o["variance"], o["n"])
        mde = minimum_detectable_effect(pspec)
        lines.append(f"Minimum detectable effect: {mde:.3f}")
        csv = f"n,mde\n{pspec.n},{mde!r}\n"
        if o.get("simulate"):
            sim = simulate_power(mde, pspec, o["simulate"], o["seed"])
            lines.append(f"Simulated rejection rate at the MDE: {sim.rejection_rate:.4f} "
                         f"(SE {sim.std_err:.4f}, {sim.replicates} replicates)")
    _emit(spec, "power", {"text": (".txt", "\n".join(lines) + "\n"), "csv": (".csv", csv)})
    return 0


def _simulate(spec: CommandSpec) -> int:
    o = spec.options
    groups = read_parameters(spec.inputs[0]).group_parameters()
    name = o.get("group") or next(iter(groups))
    if name not in groups:
        raise ValidationError(f"Unknown group '{name}'. Choose one of {', '.join(groups)}.")
    group = groups[name]
    if o.get("scale_to") is not None:
        group = group.scaled(o["scale_to"])
    cfg = SimConfig(group=group, replicates=o["replicates"], seed=spec.seed, stream_count=o["streams"])
    report = compare_to_closed_form(cfg, workers=o.get("workers"))
    rows = ["quantity,closed_form,mc_mean,std_err,z,flagged"]
    rows += [f"{r.quantity},{r.closed_form!r},{r.mc_mean!r},{r.std_err!r},{r.z!r},{int(r.flagged)}"
             for r in report.rows]
    _emit(spec, f"simulate_{name}", {
        "text": (".txt", render_oracle(report, spec.unit)),
        "csv": (".csv", "\n".join(rows) + "\n"),
    })
    if o.get("strict") and not report.passed:
        return 2
    return 0


def _report(spec: CommandSpec) -> int:
    records = read_survey_csv(spec.options["survey"]) if spec.options.get("survey") else None
    bundle = build_bundle(read_parameters(spec.inputs[0]), records, deterministic=spec.deterministic)
    if spec.out_dir is None:
        sys.stdout.write(render_bundle(bundle, spec.unit))
        return 0
    formats = spec.options.get("explicit_formats") or FORMATS
    emit_reports(bundle, spec.out_dir, formats, spec.unit)
    return 0


_HANDLERS = {
    "losses": _losses,
    "surplus": _surplus,
    "sweep": _sweep,
    "margins": _margins,
    "incidence": _incidence,
    "power": _power,
    "simulate": _simulate,
    "report": _report,
}


def run(spec: CommandSpec) -> int:
    """Execute one subcommand; MilkFeverError subclasses propagate."""
    if spec.subcommand not in _HANDLERS:
        raise UsageError(f"Unknown subcommand '{spec.subcommand}'.")
    return _HANDLERS[spec.subcommand](spec)


def _spec_from_args(args: argparse.Namespace) -> CommandSpec:
    options = {k: v for k, v in vars(args).items()
               if k not in ("subcommand", "out_dir", "formats", "unit", "deterministic", "verbose",
                            "params", "survey", "seed")}
    if args.subcommand == "report":
        options["survey"] = args.survey
        options["explicit_formats"] = args.formats
        inputs = (args.params,)
    elif args.subcommand in ("margins", "incidence"):
        inputs = (args.survey,)
    elif args.subcommand == "power":
        inputs = ()
        options["seed"] = args.seed
    else:
        inputs = (args.params,)
    if args.subcommand == "margins":
        options["factors"] = options.pop("factor")
    return CommandSpec(
        subcommand=args.subcommand,
        inputs=inputs,
        out_dir=args.out_dir,
        formats=args.formats or ("text",),
        unit=args.unit,
        deterministic=args.deterministic,
        seed=getattr(args, "seed", None),
        verbosity=args.verbose,
        options=options,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse ``argv`` and run the subcommand.

    Returns:
        Process exit status.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except MilkFeverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    _configure_logging(args.verbose)
    try:
        return run(_spec_from_args(args))
    except MilkFeverError as exc:
        logger.debug("failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
