"""End-to-end command-line flows, exit codes, config precedence."""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from volcast.cli import main, parse_pipeline, read_config_file
from volcast.errors import InvalidConfig
from volcast.panel_data import load_daily_rv, load_intraday, load_measures_panel
from volcast.realized_measures import compute_rv
from volcast.report import file_sha256


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    """One shared har-panel simulation reused by the pipeline tests."""
    out = tmp_path_factory.mktemp("sim")
    code = run("simulate", "--preset", "har-panel", "--N", 3, "--T", 160,
               "--seed", 5, "--out", out)
    assert code == 0
    return out


@pytest.fixture(scope="module")
def runs_dir(tmp_path_factory, sim_dir):
    out = tmp_path_factory.mktemp("runs")
    code = run("forecast", "--in", sim_dir / "daily_rv.csv",
               "--bench", "har:ols", "--model", "har:lasso",
               "--window", 60, "--cv", 3, "--grid", 8, "--cv-refresh", 25,
               "--seed", 5, "--out", out)
    assert code == 0
    return out


def test_simulate_har_panel_outputs(sim_dir):
    panel = load_daily_rv(sim_dir / "daily_rv.csv")
    assert panel.n_firms == 3 and panel.n_days == 160
    truth = json.loads((sim_dir / "truth.json").read_text())
    assert np.asarray(truth["phi"]).shape == (3, 9)
    manifest = json.loads((sim_dir / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["outputs"] == ["daily_rv.csv", "truth.json"]
    assert "timestamp" not in json.dumps(manifest).lower()


def test_simulate_paths_and_measures(tmp_path):
    sim = tmp_path / "paths"
    assert run("simulate", "--preset", "sv-jumps", "--N", 1, "--T", 30,
               "--M", 39, "--seed", 2, "--out", sim) == 0
    intraday = load_intraday(sim / "intraday.csv")
    assert intraday.n_days == 30
    truth = pd.read_csv(sim / "truth.csv")
    assert list(truth.columns) == ["date", "firm", "iv", "jv"]

    meas = tmp_path / "measures.csv"
    assert run("measures", "--in", sim / "intraday.csv", "--out", meas) == 0
    panel = load_measures_panel(meas)
    assert panel.bpv is not None and panel.rq is not None
    want = compute_rv(intraday.returns["F00"][0])
    assert panel.rv[0, 0] == pytest.approx(want, rel=1e-12)
    assert (tmp_path / "measures.csv.manifest.json").exists()


def test_constant_vol_preset(tmp_path):
    sim = tmp_path / "cv"
    assert run("simulate", "--preset", "constant-vol", "--N", 1, "--T", 5,
               "--M", 20, "--sigma2", "0.5", "--out", sim) == 0
    truth = pd.read_csv(sim / "truth.csv")
    np.testing.assert_allclose(truth["iv"], 0.5, rtol=1e-12)
    np.testing.assert_array_equal(truth["jv"], 0.0)


def test_fit_outputs(sim_dir, tmp_path):
    out = tmp_path / "fit"
    assert run("fit", "--in", sim_dir / "daily_rv.csv", "--firm", "F00",
               "--spec", "har", "--scope", "cross", "--penalty", "lasso",
               "--cv", 3, "--grid", 8, "--out", out) == 0
    payload = json.loads((out / "fit_F00_har-lasso.json").read_text())
    assert payload["firm"] == "F00"
    assert len(payload["coef"]) == 9
    assert payload["lambda"] > 0
    assert set(payload["active"]) <= set(payload["columns"])
    csv = (out / "fit_F00_har-lasso.csv").read_text().splitlines()
    assert csv[0] == "column,coef" and csv[1].startswith("(intercept),")


def test_forecast_outputs(runs_dir):
    manifest = json.loads((runs_dir / "manifest.json").read_text())
    assert sorted(manifest["runs"]) == ["run_F00.csv", "run_F01.csv", "run_F02.csv"]
    meta = manifest["runs"]["run_F00.csv"]
    # 160 days -> 138 usable rows at h=1; window 60 leaves 78 forecasts
    assert meta["n"] == 78
    assert meta["label1"] == "har:ols" and meta["label2"] == "harx:lasso"
    df = pd.read_csv(runs_dir / "run_F00.csv")
    assert len(df) == 78
    assert list(df.columns) == ["date", "actual", "f1", "f2", "e1", "e2", "L1", "L2", "d"]


def test_epa_and_decision_outputs(runs_dir, tmp_path):
    out = tmp_path / "epa"
    assert run("test", "--runs", runs_dir, "--out", out) == 0
    records = json.loads((out / "epa_results.json").read_text())
    assert {r["test"] for r in records} == {"dm", "cw", "gw"}
    assert {r["firm"] for r in records} == {"F00", "F01", "F02"}
    assert all(0.0 <= r["p_value"] <= 1.0 for r in records)
    text = (out / "epa_tables.txt").read_text()
    assert "== DM ==" in text and "== GW ==" in text
    decisions = (out / "decisions.csv").read_text().splitlines()
    assert decisions[0] == "firm,model,choice,predicted_loss_diff"
    assert len(decisions) == 4
    assert all(l.split(",")[2] in ("benchmark", "challenger") for l in decisions[1:])
    for t in ("dm", "cw", "gw"):
        assert (out / f"epa_{t}.csv").exists()


def test_report_rerenders_stored_results(runs_dir, tmp_path):
    epa = tmp_path / "epa"
    assert run("test", "--runs", runs_dir, "--tests", "dm", "--out", epa) == 0
    rep = tmp_path / "rerender"
    assert run("report", "--results", epa / "epa_results.json",
               "--format", "csv", "--out", rep) == 0
    df = pd.read_csv(rep / "epa_dm.csv")
    assert list(df["firm"]) == ["F00", "F01", "F02"]


def test_exit_code_config_error(tmp_path, sim_dir):
    assert run("fit", "--in", sim_dir / "daily_rv.csv", "--firm", "F00",
               "--spec", "harx", "--out", tmp_path) == 2
    assert run("forecast", "--in", sim_dir / "daily_rv.csv",
               "--bench", "har", "--out", tmp_path) == 2


def test_exit_code_data_error(tmp_path):
    assert run("measures", "--in", tmp_path / "absent.csv",
               "--out", tmp_path / "x.csv") == 3
    assert run("report", "--results", tmp_path / "absent.json",
               "--out", tmp_path) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("report", "--results", bad, "--out", tmp_path) == 3


def test_exit_code_numerical_error(sim_dir, tmp_path):
    """Identical pipelines tie exactly, so the loss differential is
    degenerate and the EPA stage fails as a numerical error."""
    runs = tmp_path / "tied"
    assert run("forecast", "--in", sim_dir / "daily_rv.csv",
               "--bench", "har:ols", "--model", "har:ols",
               "--bench-scope", "bench", "--model-scope", "bench",
               "--window", 60, "--out", runs) == 0
    assert run("test", "--runs", runs, "--out", tmp_path / "epa") == 4


def test_expanding_scheme_refused_by_gw(sim_dir, tmp_path):
    runs = tmp_path / "exp"
    assert run("forecast", "--in", sim_dir / "daily_rv.csv",
               "--scheme", "expanding", "--window", 60,
               "--cv", 3, "--grid", 8, "--cv-refresh", 25,
               "--out", runs) == 0
    assert run("test", "--runs", runs, "--tests", "gw", "--out", tmp_path / "epa") == 2
    assert run("test", "--runs", runs, "--tests", "dm", "--out", tmp_path / "epa2") == 0


def test_insufficient_window_is_data_error(sim_dir, tmp_path):
    assert run("forecast", "--in", sim_dir / "daily_rv.csv",
               "--window", 140, "--out", tmp_path / "r") == 3


def test_config_file_and_cli_precedence(sim_dir, tmp_path):
    cfg = tmp_path / "fc.cfg"
    cfg.write_text("window=70\ncv-refresh=25  # comment\ncv=3\ngrid=8\n")
    out1 = tmp_path / "r1"
    assert run("forecast", "--in", sim_dir / "daily_rv.csv", "--config", cfg,
               "--out", out1) == 0
    m1 = json.loads((out1 / "manifest.json").read_text())
    assert m1["config"]["window"] == 70
    # an explicit flag beats the file
    out2 = tmp_path / "r2"
    assert run("forecast", "--in", sim_dir / "daily_rv.csv", "--config", cfg,
               "--window", 80, "--out", out2) == 0
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m2["config"]["window"] == 80


def test_config_file_errors(sim_dir, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no_such_option=1\n")
    assert run("forecast", "--in", sim_dir / "daily_rv.csv", "--config", cfg,
               "--out", tmp_path / "r") == 2
    cfg.write_text("window 70\n")
    assert run("forecast", "--in", sim_dir / "daily_rv.csv", "--config", cfg,
               "--out", tmp_path / "r") == 2
    assert run("forecast", "--in", sim_dir / "daily_rv.csv",
               "--config", tmp_path / "absent.cfg", "--out", tmp_path / "r") == 2


def test_read_config_file_parses_values(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# full line comment\nwindow=12\nfloor-zero=true\n\nloss=absolute\n")
    out = read_config_file(cfg)
    assert out == {"window": "12", "floor_zero": "true", "loss": "absolute"}


def test_parse_pipeline():
    spec = parse_pipeline("harq:lasso", "cross", 0.5, 1.0)
    assert spec.model.variant == "harq"
    assert spec.model.scope == "cross_section"
    assert spec.penalty.kind == "lasso"
    ols = parse_pipeline("har:ols", "bench", 0.5, 1.0)
    assert ols.penalty is None
    with pytest.raises(InvalidConfig):
        parse_pipeline("har", "bench", 0.5, 1.0)
    with pytest.raises(InvalidConfig):
        parse_pipeline("har:ridge", "bench", 0.5, 1.0)


def test_threads_do_not_change_bytes(sim_dir, tmp_path, monkeypatch):
    args = ["forecast", "--in", str(sim_dir / "daily_rv.csv"),
            "--model", "har:lasso", "--window", 60,
            "--cv", 3, "--grid", 8, "--cv-refresh", 25, "--seed", 9]
    hashes = []
    for name, extra in [("t1", ["--threads", "1"]),
                        ("t3", ["--threads", "3"]),
                        ("env", [])]:
        out = tmp_path / name
        if not extra:
            monkeypatch.setenv("VOLCAST_THREADS", "2")
        assert run(*args, "--out", out, *extra) == 0
        hashes.append({p.name: file_sha256(p) for p in sorted(out.iterdir())})
    assert hashes[0] == hashes[1] == hashes[2]


def test_version_and_help_exit_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "volcast" in capsys.readouterr().out
