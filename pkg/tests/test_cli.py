import csv
import io
import json
import math
import subprocess
import sys
from importlib import resources

import pytest

from macrocat import cavity_amplifier as cav
from macrocat import cli
from macrocat import guessing_game as gg

SAMPLE = str(resources.files("macrocat") / "data" / "experiments_sample.csv")

INVOCATIONS = [
    ["state", "--g", "0.5", "--eta", "0.9", "--dh1", "0.01"],
    ["game", "--kind", "tms", "--g", "1.0", "--sigma", "0.5", "--samples", "20000", "--p-target", "0.75"],
    ["game", "--kind", "cat", "--alpha", "2.0", "--sigma", "1.0", "--samples", "20000"],
    ["ingest", SAMPLE],
    ["cavity", "--chi", "1.0", "--lambda", "0.5", "--t-max", "2.0", "--steps", "4"],
    ["verify"],
    ["neff", "--g", "0.4", "--cutoff", "30", "--v-minus", "0.5", "--alpha-sq", "2.0", "--eta", "0.9"],
    ["coherence", "--g", "0.4", "--gamma1", "1.5", "--gamma2", "2.0", "--points", "128"],
]


def run(capsys, argv):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("argv", INVOCATIONS, ids=lambda a: a[0])
def test_subcommands_are_byte_identical(capsys, argv):
    for fmt in ("table", "csv", "json"):
        first = run(capsys, argv + ["--format", fmt, "--seed", "7"])
        second = run(capsys, argv + ["--format", fmt, "--seed", "7"])
        assert first[0] == 0, first[2]
        assert first == second


def test_state_reference_values(capsys):
    code, out, _ = run(capsys, ["state", "--g", "0.5", "--format", "csv"])
    assert code == 0
    table = {r["quantity"]: r for r in rows_of(out)}
    assert float(table["duan_simon"]["ideal"]) == pytest.approx(0.73576, abs=5e-6)
    _, out, _ = run(capsys, ["state", "--g", "0", "--format", "csv"])
    assert float({r["quantity"]: r for r in rows_of(out)}["duan_simon"]["ideal"]) == 2.0


def test_state_loss_composition(capsys):
    eta = 0.8
    _, out, _ = run(capsys, ["state", "--g", "0.5", "--eta", str(eta), "--format", "csv"])
    ds = float({r["quantity"]: r for r in rows_of(out)}["duan_simon"]["noisy"])
    assert ds == pytest.approx(eta * 2 * math.exp(-1) + 2 * (1 - eta), rel=1e-12)


def test_state_rejects_bad_eta(capsys):
    code, _, err = run(capsys, ["state", "--g", "0.5", "--eta", "1.5"])
    assert code == 1
    assert "eta" in err


def test_ingest_anchor_and_order(capsys):
    code, out, _ = run(capsys, ["ingest", SAMPLE, "--format", "csv"])
    assert code == 0
    rows = rows_of(out)
    assert list(rows[0].keys()) == cli.TABLE_COLUMNS
    assert [int(r["year"]) for r in rows] == sorted(int(r["year"]) for r in rows)
    anchor = rows[0]
    assert float(anchor["n_eff_as_printed"]) == 1.2
    assert float(anchor["equivalent_cat_N_as_printed"]) == pytest.approx(0.47, abs=0.02)
    assert float(anchor["equivalent_cat_N_derivation_consistent"]) == pytest.approx(0.2, abs=0.05)


def test_ingest_sorts_stably_by_year(tmp_path, capsys):
    path = tmp_path / "in.csv"
    path.write_text(
        "label,year,v_minus,mean_photon_number,source_note\n"
        "late,2010,0.5,,\nfirst-2000,2000,0.4,,\nsecond-2000,2000,0.3,,\n"
    )
    _, out, _ = run(capsys, ["ingest", str(path), "--format", "csv"])
    assert [r["label"] for r in rows_of(out)] == ["first-2000", "second-2000", "late"]


def test_ingest_empty_file(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("")
    code, out, _ = run(capsys, ["ingest", str(path), "--format", "csv"])
    assert code == 0
    assert out.strip() == ",".join(cli.TABLE_COLUMNS)


def test_ingest_malformed_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("label,year,v_minus,mean_photon_number,source_note\nok,2001,0.5,,\nbad,2002,abc,,\n")
    code, out, err = run(capsys, ["ingest", str(path)])
    assert code == 2
    assert "line 3" in err and "v_minus" in err
    assert out == ""


def test_ingest_missing_column(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("label,year,mean_photon_number,source_note\nx,2001,,\n")
    code, _, err = run(capsys, ["ingest", str(path)])
    assert code == 2 and "v_minus" in err


def test_ingest_skips_nonpositive_variance(tmp_path, capsys):
    path = tmp_path / "skip.csv"
    path.write_text("label,year,v_minus,mean_photon_number,source_note\nkeep,2001,0.5,,\ndrop,2002,0,,\nneg,2003,-1,,\n")
    code, out, err = run(capsys, ["ingest", str(path), "--format", "csv"])
    assert code == 2
    assert [r["label"] for r in rows_of(out)] == ["keep"]
    assert "skipped 2 record(s)" in err
    assert "line 3" in err and "line 4" in err


def test_ingest_recompute_round_trip(tmp_path, capsys):
    first = tmp_path / "table.csv"
    assert cli.main(["ingest", SAMPLE, "--format", "csv", "-o", str(first)]) == 0
    second = tmp_path / "again.csv"
    assert cli.main(["ingest", str(first), "--recompute", "--format", "csv", "-o", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    # an emitted table without --recompute is refused for its extra columns
    assert cli.main(["ingest", str(first)]) == 2
    # a tampered derived value trips the gate
    text = first.read_text().replace(",1.2,", ",1.3,", 1)
    first.write_text(text)
    code = cli.main(["ingest", str(first), "--recompute", "--format", "csv"])
    _, err = capsys.readouterr()
    assert code == 3 and "n_eff_as_printed" in err


def test_game_gate_trips_on_tampered_formula(capsys, monkeypatch):
    monkeypatch.setattr(gg, "p_guess_tms", lambda g, sigma: 0.6)
    code, out, err = run(capsys, ["game", "--kind", "tms", "--g", "1.0", "--sigma", "0.5", "--samples", "20000"])
    assert code == 3
    assert "gate failure" in err
    assert "z_score" in out


def test_game_needs_parameter(capsys):
    code, _, err = run(capsys, ["game", "--kind", "cat", "--sigma", "0.5"])
    assert code == 1 and "--alpha" in err


def test_game_reports_both_sigma_formulas(capsys):
    code, out, _ = run(capsys, ["game", "--kind", "tms", "--g", "1", "--sigma", "0.3", "--samples", "10000",
                               "--p-target", "0.75", "--format", "json"])
    row = json.loads(out)[0]
    assert code == 0
    assert gg.p_guess_tms(1.0, row["sigma_max"]) == pytest.approx(0.75, abs=1e-9)
    assert row["sigma_max_printed"] != row["sigma_max"]


def test_verify_passes_and_trips_when_tampered(capsys, monkeypatch):
    code, out, _ = run(capsys, ["verify", "--format", "json"])
    assert code == 0
    assert {r["status"] for r in json.loads(out)} == {"pass"}
    original = cav.propagate_scalars

    def skewed(*args, **kwargs):
        e, m, k = original(*args, **kwargs)
        return e * (1 + 1e-6), m, k

    monkeypatch.setattr(cav, "propagate_scalars", skewed)
    code, out, err = run(capsys, ["verify", "--format", "json"])
    assert code == 3
    assert "closed-form-vs-rk4" in err
    assert {r["check"]: r["status"] for r in json.loads(out)}["closed-form-vs-rk4"] == "FAIL"


def test_cavity_rows(capsys):
    code, out, _ = run(capsys, ["cavity", "--chi", "1", "--lambda", "2", "--t-max", "30", "--steps", "3",
                               "--format", "json"])
    rows = json.loads(out)
    assert code == 0 and len(rows) == 4
    assert rows[0]["delta_minus"] == 0.5
    assert rows[-1]["delta_minus"] == pytest.approx(1 / 3, rel=1e-12)
    assert rows[-1]["delta_plus"] == pytest.approx(1.0, rel=1e-12)
    assert rows[-1]["regime"] == "below"


def test_neff_outputs(capsys):
    code, out, _ = run(capsys, ["neff", "--g", "0.4", "--cutoff", "40", "--format", "json"])
    values = {r["quantity"]: r["value"] for r in json.loads(out)}
    assert code == 0
    assert values["n_eff_exact"] == pytest.approx(math.exp(0.8) / 2, rel=1e-12)
    assert values["n_eff_fock_qfi"] == pytest.approx(math.exp(0.8) / 2, abs=1e-8)
    _, out, _ = run(capsys, ["neff", "--eta", "0.9", "--dh", "0.05", "0.05", "--format", "json"])
    values = {r["quantity"]: r["value"] for r in json.loads(out)}
    assert values["cap_loss"] == 10.0
    assert values["cap_quadrature_noise"] == 10.0


def test_neff_requires_something(capsys):
    code, _, _ = run(capsys, ["neff"])
    assert code == 1


def test_coherence_routes(capsys):
    code, out, _ = run(capsys, ["coherence", "--g", "0.4", "--gamma1", "1.0", "--format", "json"])
    rows = {r["route"]: r for r in json.loads(out)}
    assert code == 0
    assert rows["formula"]["p1_sq"] - rows["ideal"]["p1_sq"] == pytest.approx(1.0, abs=1e-6)
    assert rows["direct"]["p1_sq"] == pytest.approx(rows["formula"]["p1_sq"], abs=1e-6)
    code, out, _ = run(capsys, ["coherence", "--g", "0.4", "--epsilon", "0.1", "--format", "json"])
    routes = [r["route"] for r in json.loads(out)]
    assert code == 0 and "formula" not in routes


def test_usage_errors(capsys):
    assert run(capsys, ["bogus"])[0] == 1
    assert run(capsys, [])[0] == 1
    assert run(capsys, ["state"])[0] == 1
    assert run(capsys, ["state", "--g", "x"])[0] == 1
    assert run(capsys, ["cavity", "--chi", "0", "--lambda", "1", "--t-max", "1"])[0] == 1


def test_seed_from_environment(capsys, monkeypatch):
    argv = ["game", "--kind", "tms", "--g", "1", "--sigma", "0.5", "--samples", "5000", "--format", "csv"]
    monkeypatch.setenv(cli.SEED_ENV, "11")
    from_env = run(capsys, argv)
    monkeypatch.delenv(cli.SEED_ENV)
    from_flag = run(capsys, argv + ["--seed", "11"])
    default = run(capsys, argv)
    assert from_env == from_flag
    assert default[1] == run(capsys, argv + ["--seed", str(cli.DEFAULT_SEED)])[1]
    assert default[1] != from_flag[1]
    monkeypatch.setenv(cli.SEED_ENV, "eleven")
    assert run(capsys, argv)[0] == 1


def test_verbose_prints_config(capsys):
    code, _, err = run(capsys, ["state", "--g", "0.3", "--verbose", "--seed", "0x10"])
    assert code == 0
    config = json.loads(err.split("config: ", 1)[1].splitlines()[0])
    assert config["g"] == 0.3 and config["seed"] == 16


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, ["state", "--g", "0.3", "--format", "json", "--output", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())[0]["quantity"] == "mean_photon_number"


def test_json_renders_infinities():
    text = cli.render([{"a": math.inf, "b": 1.5}], "json")
    assert json.loads(text) == [{"a": "inf", "b": 1.5}]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "macrocat", "state", "--g", "0.5", "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "duan_simon" in proc.stdout
