import pytest

from conftest import HARYANA, SAMPLE, SURVEY
from milkfeverecon.cli import OUTPUT_DIR_ENV, CommandSpec, main, run
from milkfeverecon.errors import ValidationError
from milkfeverecon.ingest import SURVEY_COLUMNS


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def no_output_dir(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


def test_losses(capsys):
    code, out, _ = run_cli(capsys, "losses", HARYANA)
    assert code == 0
    assert "Economic losses due to milk fever: haryana" in out
    assert "Total (sum)" in out
    assert "Total (pooled)" in out


def test_losses_csv(capsys):
    code, out, _ = run_cli(capsys, "losses", HARYANA, "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "scenario,group,quantity,value"
    assert all(line.split(",")[2].startswith(("loss.", "prevention.")) for line in lines[1:])


def test_surplus(capsys):
    code, out, _ = run_cli(capsys, "surplus", HARYANA)
    assert code == 0
    assert "Supply shift (K)" in out
    assert "Total (pooled)" in out


def test_surplus_needs_a_market(capsys):
    code, _, err = run_cli(capsys, "surplus", SAMPLE)
    assert code == 1
    assert "no market block" in err


def test_sweep(capsys):
    code, out, _ = run_cli(capsys, "sweep", HARYANA)
    assert code == 0
    assert "pooled basis" in out
    assert "40%" in out


def test_sweep_with_rates_as_csv(capsys):
    code, out, _ = run_cli(capsys, "sweep", HARYANA, "--rates", "0,0.5", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "adoption_rate,gain_rupees"
    assert lines[1] == "0.0,0.0"
    assert float(lines[2].split(",")[1]) / 1e7 == pytest.approx(27475.8 / 2, rel=0.005)


def test_sweep_sensitivity(capsys):
    code, out, _ = run_cli(capsys, "sweep", HARYANA, "--vary", "success_rate=0.5,0.9", "--format", "plot")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# success_rate\tgain_crore"
    gains = [float(line.split("\t")[1]) for line in lines[1:]]
    assert gains[1] == pytest.approx(27475.8, rel=0.005)
    assert gains[0] == pytest.approx(gains[1] * 0.5 / 0.9)


def test_sweep_rejects_bad_arguments(capsys):
    assert run_cli(capsys, "sweep", HARYANA, "--vary", "colour=1")[0] == 1
    assert run_cli(capsys, "sweep", HARYANA, "--rates", "a,b")[0] == 1
    assert run_cli(capsys, "sweep", HARYANA, "--rates", "0.5,2")[0] == 1


def test_margins(capsys):
    code, out, _ = run_cli(capsys, "margins", SURVEY, "--factor", "cell")
    assert code == 0
    assert "3#cow" in out
    assert "By parity" not in out


def test_margins_csv(capsys):
    code, out, _ = run_cli(capsys, "margins", SURVEY, "--format", "csv")
    assert code == 0
    rows = {tuple(line.split(",")[:2]): line for line in out.splitlines()[1:]}
    assert ("parity", "2") in rows
    assert ("species", "buffalo") in rows
    assert ("cell", "5#cow") in rows


def test_margins_on_separated_data(capsys, tmp_path):
    lines = [",".join(SURVEY_COLUMNS)]
    for i in range(10):
        lines.append(f"A{i},cow,2,{int(i < 3)},0,12,12,5,20,12,3.7,0.03,0.6,2,40,60000,0")
        lines.append(f"B{i},buffalo,2,0,0,12,12,5,20,12,3.7,0.03,0.6,2,40,60000,0")
    path = tmp_path / "separated.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    code, _, err = run_cli(capsys, "margins", path)
    assert code == 2
    assert "separation" in err


def test_incidence(capsys):
    code, out, _ = run_cli(capsys, "incidence", SURVEY, "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[1].startswith("cow,107,30,2,")
    assert lines[2].startswith("buffalo,105,20,2,")


def test_incidence_describe(capsys):
    code, out, _ = run_cli(capsys, "incidence", SURVEY, "--describe")
    assert code == 0
    assert "28.04" in out
    assert "Sample means (standard errors)" in out
    assert "16.01" in out


def test_power(capsys):
    code, out, _ = run_cli(capsys, "power", "--n", 200)
    assert code == 0
    assert "Minimum detectable effect: 0.396" in out
    code, out, _ = run_cli(capsys, "power", "--effect", 0.396)
    assert code == 0
    assert "Required sample size N: 200" in out


def test_power_simulation(capsys):
    code, out, _ = run_cli(capsys, "power", "--n", 200, "--simulate", 4000, "--seed", 3)
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("Simulated rejection rate"))
    assert float(line.split(": ")[1].split()[0]) == pytest.approx(0.80, abs=0.03)


def test_power_argument_errors(capsys):
    assert run_cli(capsys, "power")[0] == 1
    assert run_cli(capsys, "power", "--n", 200, "--p", 1.5)[0] == 1
    assert run_cli(capsys, "power", "--n", "many")[0] == 1


def test_simulate(capsys):
    code, out, _ = run_cli(capsys, "simulate", SAMPLE, "--replicates", 5000, "--seed", 1, "--streams", 2)
    assert code == 0
    assert "Monte-Carlo check of 'Cows'" in out
    assert "5000 replicates, 107 animals" in out


def test_simulate_is_reproducible(capsys):
    argv = ("simulate", HARYANA, "--group", "buffaloes", "--scale-to", 1000, "--replicates", 3000,
            "--seed", 9, "--format", "csv")
    first = run_cli(capsys, *argv)
    second = run_cli(capsys, *argv, "--streams", 1, "--workers", 3)
    assert first[0] == second[0] == 0
    assert first[1] == second[1]


def test_simulate_unknown_group(capsys):
    code, _, err = run_cli(capsys, "simulate", SAMPLE, "--group", "goats")
    assert code == 1
    assert "goats" in err


def test_report_files_are_byte_identical(capsys, tmp_path):
    for name in ("a", "b"):
        code, _, _ = run_cli(capsys, "report", HARYANA, "--survey", SURVEY,
                             "--out-dir", tmp_path / name, "--deterministic")
        assert code == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == ["haryana_adoption.tsv", "haryana_report.txt", "haryana_results.csv", "manifest.json"]
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_report_to_stdout(capsys):
    code, out, _ = run_cli(capsys, "report", HARYANA)
    assert code == 0
    assert "Efficiency gain by adoption rate" in out


def test_output_dir_from_environment(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = run_cli(capsys, "losses", HARYANA, "--format", "text", "--format", "csv")
    assert code == 0
    assert out == ""
    assert (tmp_path / "haryana_losses.txt").exists()
    assert (tmp_path / "haryana_losses.csv").exists()


def test_exit_codes(capsys, tmp_path):
    assert run_cli(capsys)[0] == 1
    assert run_cli(capsys, "graze")[0] == 1
    assert run_cli(capsys, "losses", tmp_path / "missing.params")[0] == 3
    bad = tmp_path / "bad.params"
    bad.write_text('{"scenario": "x", "groups": {}}', encoding="utf-8")
    code, _, err = run_cli(capsys, "losses", bad)
    assert code == 1
    assert "groups" in err


def test_undecodable_survey_is_invalid_input(capsys, tmp_path):
    path = tmp_path / "latin1.csv"
    path.write_bytes(",".join(SURVEY_COLUMNS).encode("utf-8") + b"\nC\xf6001,cow,2,0,0\n")
    code, _, err = run_cli(capsys, "incidence", path)
    assert code == 1
    assert "line 2" in err
    assert "not valid UTF-8" in err


def test_run_rejects_unknown_subcommand():
    with pytest.raises(ValidationError):
        run(CommandSpec(subcommand="graze"))
