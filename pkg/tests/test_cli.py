"""Command-line behavior: exit codes, validation, reports, env overrides."""

import json
import warnings

import yaml

from lbwind.cli import main

BASE = {
    "domain": {"cells": [12, 12, 12]},
    "fluid": {"kinematic_viscosity": 5.0, "wind": [8.0, 0.0, 0.0]},
    "resolution": {"cells_per_diameter": 8, "reference_diameter": 2.0,
                   "mach": 0.1},
    "run": {"steps": 2},
}


def _write(tmp_path, raw, name="c.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw))
    return str(path)


def test_validate_ok(tmp_path, capsys):
    rc = main(["run", _write(tmp_path, BASE), "--validate"])
    assert rc == 0
    assert "config OK" in capsys.readouterr().out


def test_unknown_key_is_named_and_exits_2(tmp_path, capsys):
    raw = dict(BASE, bogus_section={"a": 1})
    rc = main(["run", _write(tmp_path, raw), "--validate"])
    assert rc == 2
    err = capsys.readouterr().err
    assert "configuration error" in err
    assert "bogus_section" in err


def test_unstable_resolution_exits_2(tmp_path, capsys):
    raw = dict(BASE, resolution=dict(BASE["resolution"], mach=0.5))
    rc = main(["run", _write(tmp_path, raw), "--validate"])
    assert rc == 2
    assert "lattice speed" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path, capsys):
    rc = main(["run", str(tmp_path / "nope.yaml")])
    assert rc == 2
    assert "configuration error" in capsys.readouterr().err


def test_numerical_blowup_exits_3(tmp_path, capsys):
    (tmp_path / "blow.yaml").write_text("""
name: blow
components:
  - name: hub
    position: [1.5, 1.5, 1.5]
  - name: blade
    parent: hub
    discretization: {type: line, points: 3, r_end: 1.0,
                     chord: 1.0e+308, polar: flat}
""")
    (tmp_path / "flat.csv").write_text("alpha_deg,cl,cd\n-10,1,0\n10,1,0\n")
    raw = dict(BASE,
               run={"steps": 5},
               turbines=[{"file": "blow.yaml"}],
               polars=[{"id": "flat", "file": "flat.csv"}],
               output={"directory": str(tmp_path / "out")})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rc = main(["run", _write(tmp_path, raw)])
    assert rc == 3
    err = capsys.readouterr().err
    assert "numerical abort" in err
    assert "step 0" in err


def test_report_emits_kernel_json(tmp_path, capsys):
    raw = dict(BASE, machine={"name": "box",
                              "stream_bandwidth_GB_s": 100.0,
                              "peak_tflops": 2.0})
    rc = main(["report", _write(tmp_path, raw)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kernel"]["bytes_per_update"] == 456   # double precision
    assert doc["machine"]["estimated_peak_mlups"] > 0
    assert 0 < doc["machine"]["lightspeed"] <= 1.0


def test_report_validate_only_checks_config(tmp_path, capsys):
    rc = main(["report", _write(tmp_path, BASE), "--validate"])
    assert rc == 0
    assert "config OK" in capsys.readouterr().out


def test_run_writes_report_and_prints_summary(tmp_path, capsys):
    raw = dict(BASE, output={"directory": str(tmp_path / "out")})
    rc = main(["run", _write(tmp_path, raw)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "MLUPS" in out
    with open(tmp_path / "out" / "report.json") as fh:
        doc = json.load(fh)
    assert doc["performance"]["steps"] == 2


def test_workers_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("LBWIND_WORKERS", "3")
    raw = dict(BASE,
               run={"steps": 1, "block_dims": [6, 6, 6]},
               output={"directory": str(tmp_path / "out")})
    rc = main(["run", _write(tmp_path, raw)])
    assert rc == 0
    with open(tmp_path / "out" / "report.json") as fh:
        doc = json.load(fh)
    assert doc["grid"]["workers"] == 3
    assert doc["config"]["run"]["workers"] == 3


def test_workers_env_invalid_exits_2(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LBWIND_WORKERS", "zero")
    rc = main(["run", _write(tmp_path, BASE), "--validate"])
    assert rc == 2
    assert "LBWIND_WORKERS" in capsys.readouterr().err
