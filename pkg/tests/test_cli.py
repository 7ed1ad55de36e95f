import json
import os
import subprocess
import sys

import pytest

from radialscope.cli import main
from radialscope.cli_reports import (EXIT_CONFIG, EXIT_FORBIDDEN_ENERGY, EXIT_NUMERICAL,
                                     EXIT_OK, AnalysisConfig, ConfigError,
                                     parallel_map)

COS2_CONFIG = {
    "mode": "explicit",
    "potential": {"n": 2, "v0": [[2, 1.0, 0.0]]},
    "energy": 2.0,
    "options": {"maxDegree": 5, "K": 2},
}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_analyze_deterministic(tmp_path):
    cfg = write_config(tmp_path, COS2_CONFIG)
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "b")]) == EXIT_OK
    ba = (tmp_path / "a" / "report.json").read_bytes()
    bb = (tmp_path / "b" / "report.json").read_bytes()
    assert ba == bb


def test_analyze_report_content(tmp_path):
    cfg = write_config(tmp_path, COS2_CONFIG)
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--format", "json,csv"]) == EXIT_OK
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    entry = rep["perEnergy"]["2.0"]
    outgoing = [k for k, v in entry.items() if v["radial"].get("outgoing")]
    assert len(outgoing) == 4
    edges = {(e["from"], e["to"]) for e in rep["global"]["dag"]["edges"]}
    assert all(src.startswith(("cp0", "cp2")) for src, _ in edges)
    assert rep["global"]["morse"]["verified"]
    assert not rep["stageErrors"]
    # trajectory CSVs double as plot data
    csvs = [f for f in os.listdir(tmp_path / "o") if f.startswith("trajectory")]
    assert len(csvs) == 4


def test_config_round_trip_identical_behavior(tmp_path):
    cfg = write_config(tmp_path, COS2_CONFIG)
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "r1")]) == EXIT_OK
    rep = json.loads((tmp_path / "r1" / "report.json").read_text())
    cfg2 = write_config(tmp_path, rep["provenance"]["config"], name="echo.json")
    assert main(["analyze", "--config", cfg2, "--out", str(tmp_path / "r2")]) == EXIT_OK
    assert (tmp_path / "r1" / "report.json").read_bytes() == \
        (tmp_path / "r2" / "report.json").read_bytes()


def test_empty_critical_points_exit_2(tmp_path):
    cfg = write_config(tmp_path, {"mode": "abstract", "criticalPoints": [],
                                  "energy": 1.0})
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_schema_violation_exit_2(tmp_path):
    cfg = write_config(tmp_path, {"mode": "bogus"})
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    missing = str(tmp_path / "missing.json")
    assert main(["analyze", "--config", missing, "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_threshold_energy_exit_3(tmp_path):
    cfg = write_config(tmp_path, dict(COS2_CONFIG, energy=1.0))   # critical value of V0
    assert main(["analyze", "--config", cfg,
                 "--out", str(tmp_path / "o")]) == EXIT_FORBIDDEN_ENERGY


def test_abstract_pipeline_and_overrides(tmp_path):
    cfg = write_config(tmp_path, {
        "mode": "abstract",
        "criticalPoints": [{"label": "min", "value": "0", "hessian": ["3/8"]}],
        "energy": "1",
    })
    assert main(["expansion", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--max-degree", "5"]) == EXIT_OK
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    data = rep["perEnergy"]["1.0"]["min"]
    assert data["radial"]["rList"] == [{"re": 0.25, "im": 0.0}]
    assert data["expansion"]["exponents"]["B"] == 0.375
    assert rep["provenance"]["effectiveOptions"]["maxDegree"] == 5


def test_scan_subcommand(tmp_path):
    cfg = write_config(tmp_path, {
        "mode": "abstract",
        "criticalPoints": [{"label": "z", "value": 0, "hessian": [-12, -4]}],
        "energy": [0.5, 2.0],
    })
    assert main(["scan-energies", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    roots = rep["global"]["energyScan"]["z"]["roots"]
    assert len(roots) == 1
    assert abs(roots[0]["sigma"] - 1.0) < 1e-8
    assert roots[0]["witness"] == {"a": 0, "alpha": [0, 2], "beta": [1, 0]}


def test_stage_isolation_failing_stage_preserves_others(tmp_path):
    # stationary-phase stage fails (sigma_c far outside the amplitude
    # support) while the abstract pipeline results stay intact
    cfg = write_config(tmp_path, {
        "mode": "abstract",
        "criticalPoints": [{"label": "min", "value": 0, "hessian": [0.375]}],
        "energy": 1.0,
        "stages": ["radial", "resonance", "expansion", "stationaryPhase"],
        "options": {"stationaryPhase": {"tau": 0.1, "center": 1.0, "width": 0.05}},
    })
    rc = main(["analyze", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == EXIT_NUMERICAL
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert "stationaryPhase" in rep["stageErrors"]
    assert rep["perEnergy"]["1.0"]["min"]["radial"]["rList"] == [{"re": 0.25, "im": 0.0}]
    assert "expansion" in rep["perEnergy"]["1.0"]["min"]


def test_stationary_phase_subcommand(tmp_path):
    cfg = write_config(tmp_path, {
        "mode": "abstract",
        "criticalPoints": [{"label": "z", "value": 0, "hessian": [1]}],
        "options": {"stationaryPhase": {"xList": [1e-2, 1e-3]}},
    })
    assert main(["stationary-phase", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--format", "json,csv"]) == EXIT_OK
    assert (tmp_path / "o" / "stationary_phase.csv").exists()
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert abs(rep["global"]["stationaryPhase"]["sigmaC"] - 1.0) < 1e-12


def test_threads_env_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("RADIALSCOPE_THREADS", "2")
    out = parallel_map(lambda v: v * v, [1, 2, 3, 4])
    assert out == [1, 4, 9, 16]
    monkeypatch.setenv("RADIALSCOPE_THREADS", "not-a-number")
    assert parallel_map(lambda v: v + 1, [1, 2]) == [2, 3]


def test_console_script_runs(tmp_path):
    cfg = write_config(tmp_path, {
        "mode": "abstract",
        "criticalPoints": [{"label": "min", "value": 0, "hessian": [0.375]}],
        "energy": 1.0,
    })
    proc = subprocess.run(
        [sys.executable, "-m", "radialscope.cli", "normal-form",
         "--config", cfg, "--out", str(tmp_path / "o")],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "report.json").exists()


def test_config_interval_validation():
    with pytest.raises(ConfigError):
        AnalysisConfig.from_dict({"mode": "abstract",
                                  "criticalPoints": [{"label": "z", "value": 0,
                                                      "hessian": [1]}],
                                  "energy": [2.0, 1.0]})
    with pytest.raises(ConfigError):
        AnalysisConfig.from_dict({"mode": "explicit", "energy": 1.0})


def test_abstract_threshold_energy_exit_3(tmp_path):
    cfg = write_config(tmp_path, {
        "mode": "abstract",
        "criticalPoints": [{"label": "z", "value": "0", "hessian": ["1/2"]}],
        "energy": "1",     # exactly V0 + 4a
    })
    assert main(["analyze", "--config", cfg,
                 "--out", str(tmp_path / "o")]) == EXIT_FORBIDDEN_ENERGY


def test_no_real_radial_point_is_informational(tmp_path):
    cfg = write_config(tmp_path, {
        "mode": "abstract",
        "criticalPoints": [{"label": "hi", "value": 5.0, "hessian": [1.0]},
                           {"label": "lo", "value": 0.0, "hessian": [-4.0]}],
        "energy": 1.0,
    })
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert "error" in rep["perEnergy"]["1.0"]["hi"]
    assert rep["perEnergy"]["1.0"]["lo"]["radial"]["class"] == "saddle"
