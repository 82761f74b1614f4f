import json

import pandas as pd
import pytest

from conftest import CRORE, SAMPLE
from milkfeverecon.errors import ReportIOError, ValidationError
from milkfeverecon.ingest import parse_parameters, read_parameters
from milkfeverecon.reports import (
    AGGREGATION_NOTE,
    POOLED_LABEL,
    SUM_LABEL,
    build_bundle,
    emit_reports,
    read_results_csv,
    render_bundle,
    render_losses,
    render_surplus,
    results_frame,
    series_tsv,
    write_text,
)


@pytest.fixture(scope="module")
def bundle(haryana_doc, survey_records):
    return build_bundle(haryana_doc, survey_records, deterministic=True)


def test_bundle_contents(bundle):
    assert [b.label for b in bundle.losses] == ["Cows", "Buffaloes"]
    assert bundle.total_sum.label == SUM_LABEL
    assert bundle.total_pooled.label == POOLED_LABEL
    assert bundle.prevention.total_cost / CRORE == pytest.approx(126.7, abs=0.5)
    assert [r.label for r in bundle.surplus] == ["Cows", "Buffaloes"]
    assert bundle.surplus_pooled.delta_ps / CRORE == pytest.approx(27475.8, rel=0.005)
    assert bundle.sweep_basis == "pooled"
    assert bundle.sweep[1].rate == 0.4
    assert bundle.sweep[1].gain / CRORE == pytest.approx(10990, rel=0.005)
    assert set(bundle.margins) == {"parity", "species", "cell"}
    assert bundle.fit is not None


def test_published_milk_losses_drive_the_market(bundle):
    cows = bundle.surplus[0]
    assert (cows.q1 - cows.q0) == pytest.approx(22.675e6)
    assert cows.delta_ps / CRORE == pytest.approx(3224.8, rel=0.005)


def test_metadata(bundle, haryana_doc):
    assert bundle.metadata["scenario"] == "haryana"
    assert bundle.metadata["input_hash"] == haryana_doc.input_hash
    assert bundle.metadata["generated_at"] is None
    stamped = build_bundle(haryana_doc)
    assert stamped.metadata["generated_at"] is not None


def test_document_without_market():
    b = build_bundle(read_parameters(SAMPLE), deterministic=True)
    assert b.surplus == ()
    assert b.surplus_pooled is None
    assert b.sweep == ()
    assert b.incidence == {}
    assert "No market block" in render_surplus(b)


def test_sum_basis_sweep(haryana_doc):
    raw = haryana_doc.model_dump()
    raw["sweep"]["basis"] = "sum"
    b = build_bundle(parse_parameters(raw), deterministic=True)
    assert b.sweep_basis == "sum"
    full = sum(r.delta_ps for r in b.surplus)
    assert b.sweep[-1].gain == pytest.approx(full)


################### Text #################

def test_loss_table(bundle):
    text = render_losses(bundle)
    for label in ("Cows", "Buffaloes", SUM_LABEL, POOLED_LABEL):
        assert label in text
    assert AGGREGATION_NOTE in text
    assert "Prevention economics" in text
    assert "TEL Total economic loss (crore)" in text


def test_loss_table_in_lakh(bundle):
    assert "(lakh)" in render_losses(bundle, unit="lakh")


def test_full_report(bundle):
    text = render_bundle(bundle)
    assert "Efficiency gain by adoption rate (pooled basis)" in text
    assert "Milk fever incidence in the sample" in text
    assert "Predictive margins" in text
    assert "28.04" in text


################### Files #################

def test_emit_all_formats(bundle, tmp_path):
    written = emit_reports(bundle, tmp_path / "out")
    assert set(written) == {"text", "csv", "plot", "manifest"}
    assert written["text"].name == "haryana_report.txt"
    assert written["plot"].read_text(encoding="utf-8").startswith("# adoption_rate\tgain_crore\n")
    manifest = json.loads(written["manifest"].read_text(encoding="utf-8"))
    assert manifest["metadata"]["input_hash"] == bundle.metadata["input_hash"]
    assert manifest["files"]["csv"] == "haryana_results.csv"
    assert manifest["notes"] == []


def test_csv_round_trip_is_exact(bundle, tmp_path):
    written = emit_reports(bundle, tmp_path, formats=["csv"])
    back = read_results_csv(written["csv"])
    expected = results_frame(bundle)
    pd.testing.assert_frame_equal(back, expected, check_exact=True)


def test_csv_quantities(bundle):
    frame = results_frame(bundle)
    values = frame.set_index(["group", "quantity"])["value"]
    assert values[("Cows", "loss.mortality_loss")] / CRORE == pytest.approx(35.35, rel=0.005)
    assert values[("sweep", "sweep.gain@0.4")] / CRORE == pytest.approx(10990, rel=0.005)
    assert values[("cow", "incidence.cases")] == 30
    assert ("parity=3", "margin.estimate") in values.index
    assert not frame["value"].isna().any()


def test_plot_data_without_sweep(tmp_path, caplog):
    b = build_bundle(read_parameters(SAMPLE), deterministic=True)
    written = emit_reports(b, tmp_path, formats=["plot"])
    assert "plot" not in written
    manifest = json.loads(written["manifest"].read_text(encoding="utf-8"))
    assert manifest["notes"]
    assert "no adoption sweep" in caplog.text


def test_deterministic_outputs_are_identical(haryana_doc, survey_records, tmp_path):
    first = emit_reports(build_bundle(haryana_doc, survey_records, deterministic=True), tmp_path / "a")
    second = emit_reports(build_bundle(haryana_doc, survey_records, deterministic=True), tmp_path / "b")
    for fmt in first:
        assert first[fmt].read_bytes() == second[fmt].read_bytes()


def test_bad_format_and_unit(bundle, tmp_path):
    with pytest.raises(ValidationError):
        emit_reports(bundle, tmp_path, formats=["pdf"])
    with pytest.raises(ValidationError):
        emit_reports(bundle, tmp_path, unit="dollars")


def test_unwritable_destination(bundle, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(ReportIOError):
        write_text(blocker / "report.txt", "text")


def test_series_tsv():
    assert series_tsv("x", "y", [(0.2, 1.5), (1.0, 2.0)]) == "# x\ty\n0.2\t1.5\n1.0\t2.0\n"
