import json
import subprocess
import sys

import numpy as np
import pytest

from growthcenters.cli import main
from growthcenters.formats import read_trajectory
from growthcenters.ingest import panel_from_trajectory, save_panel
from growthcenters.scenarios import education_scenario

from conftest import SIX_GROUP_LAMBDA

SYSTEM = {"a": [0.03, -0.07], "coupling": [[0, 0.02], [0.02, 0]], "w0": [1.0, 1.0], "t_end": 24, "dt": 0.5}


def files(path):
    return sorted(p.name for p in path.iterdir())


def manifest(path):
    return json.loads((path / "manifest.json").read_text())


@pytest.fixture
def system_file(tmp_path):
    p = tmp_path / "system.json"
    p.write_text(json.dumps(SYSTEM))
    return p


def test_simulate_six_group(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--scenario", "paper_six_group", "--out", str(out)]) == 0
    for name in ("trajectory.csv", "growth_rates.csv", "w.svg", "log_w.svg"):
        assert (out / name).stat().st_size > 0
    m = manifest(out)
    assert m["command"] == "simulate"
    assert sorted(m["files"]) == ["growth_rates.csv", "log_w.svg", "trajectory.csv", "w.svg"]
    assert m["config"]["dt"] == 0.25 and m["config"]["t_end"] == 72.0


def test_invalid_json_is_an_input_error_with_no_outputs(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    out = tmp_path / "out"
    assert main(["simulate", "--system", str(bad), "--out", str(out)]) == 1
    assert not out.exists()
    assert "invalid JSON" in capsys.readouterr().err


def test_exit_codes(tmp_path, system_file):
    assert main(["simulate"]) == 1
    assert main(["bogus"]) == 1
    assert main(["simulate", "--system", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 3
    assert main(["steady-state", "--system", str(system_file), "--max-iter", "2"]) == 2
    crash = dict(SYSTEM, a=[0.0, 0.0], env={"kind": "mean_proportional", "params": {"beta": 1.0}},
                 w0=[1.0, 1.0], dt=10.0, t_end=50.0)
    p = tmp_path / "crash.json"
    p.write_text(json.dumps(crash))
    assert main(["simulate", "--system", str(p), "--out", str(tmp_path / "c")]) == 2
    assert not (tmp_path / "c").exists()


def test_same_seed_gives_identical_bytes(tmp_path):
    for k in (1, 2):
        assert main(["simulate", "--scenario", "random_system", "--seed", "9", "--out", str(tmp_path / str(k))]) == 0
    for name in ("trajectory.csv", "growth_rates.csv", "manifest.json"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "2" / name).read_bytes()


def test_steady_state_stdout(system_file, capsys):
    assert main(["steady-state", "--system", str(system_file)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["lambda"] == pytest.approx(0.013851648071345042, abs=1e-12)


def test_report_without_layout_skips_moran(tmp_path, system_file):
    out = tmp_path / "rep"
    assert main(["report", "--system", str(system_file), "--out", str(out)]) == 0
    names = files(out)
    for name in ("steady_state.json", "jcurve.json", "dispersion.csv", "histogram.csv", "crossing.csv"):
        assert name in names
    assert "moran.csv" not in names
    assert "no layout given: Moran curve skipped" in manifest(out)["notices"]


def test_report_six_group_rate_matches_lambda(tmp_path):
    out = tmp_path / "rep"
    assert main(["report", "--scenario", "paper_six_group", "--out", str(out)]) == 0
    jc = json.loads((out / "jcurve.json").read_text())
    lam = json.loads((out / "steady_state.json").read_text())["lambda"]
    assert lam == pytest.approx(SIX_GROUP_LAMBDA, abs=1e-12)
    # the aggregate never turns around here, so the late rate is the tail fit
    assert jc["recovery_rate"] is None
    assert abs(jc["tail_rate"] - lam) < 1e-3


def test_report_from_trajectory_file(tmp_path, system_file):
    assert main(["simulate", "--system", str(system_file), "--out", str(tmp_path / "s")]) == 0
    out = tmp_path / "r"
    assert main(["report", "--system", str(system_file), "--trajectory", str(tmp_path / "s" / "trajectory.csv"),
                 "--out", str(out)]) == 0
    assert json.loads((out / "summary.json").read_text())["lambda"] > 0


def test_lattice_scenario_writes_moran(tmp_path):
    out = tmp_path / "lat"
    args = ["scenario", "lattice_growth_center", "--t-end", "120", "--out", str(out)]
    assert main(args) == 0
    for name in ("moran.csv", "moran_t0.csv", "moran.svg", "layout.csv", "system.json", "crossing.csv"):
        assert name in files(out)
    header = (out / "moran.csv").read_text().splitlines()[0]
    assert header == "band_lo_km,band_hi_km,pairs,I"


def test_moran_and_jcurve_commands(tmp_path, capsys):
    assert main(["moran", "--scenario", "lattice_growth_center", "--t-end", "24", "--symmetric-weights"]) == 0
    assert capsys.readouterr().out.startswith("band_lo_km")
    assert main(["moran", "--scenario", "paper_six_group"]) == 1
    assert main(["jcurve", "--scenario", "j_curve", "--seed", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["is_j_curve"] is True


def test_ingest_and_correlate(tmp_path, capsys):
    sc, edu, dens = education_scenario(rows=5, cols=5, seed=1)
    save_panel(panel_from_trajectory(sc.run(), edu, dens, sc.layout), tmp_path / "panel")
    assert main(["ingest", "--panel", str(tmp_path / "panel")]) == 0
    assert json.loads(capsys.readouterr().out)["counties"] == 25
    out = tmp_path / "corr"
    assert main(["correlate", "--panel", str(tmp_path / "panel"), "--out", str(out)]) == 0
    assert (out / "correlations.csv").read_text().startswith("year,count,r_education")
    assert main(["correlate", "--panel", str(tmp_path / "nowhere")]) == 1


def test_rerun_reproduces_bytes(tmp_path):
    first = tmp_path / "first"
    assert main(["scenario", "j_curve", "--seed", "4", "--t-end", "60", "--out", str(first)]) == 0
    second = tmp_path / "second"
    assert main(["rerun", str(first / "manifest.json"), "--out", str(second)]) == 0
    assert files(first) == files(second)
    for name in files(first):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_explicit_dt_overrides(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--scenario", "paper_six_group", "--dt", "1", "--t-end", "10", "--out", str(out)]) == 0
    tr = read_trajectory(out / "trajectory.csv")
    np.testing.assert_array_equal(tr.times, np.arange(11.0))
    assert main(["simulate", "--scenario", "paper_six_group", "--dt", "-1", "--out", str(out)]) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "growthcenters.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0.1.0"
