"""Configuration parsing: defaults, strict key checking, validation."""

import numpy as np
import pytest

from lbwind.config import parse_config
from lbwind.errors import ConfigError


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


MINIMAL = {"domain": {"cells": [32, 32, 32]}}


def test_minimal_config_is_a_periodic_box_with_no_turbines():
    cfg = parse_config(MINIMAL)
    assert cfg.cells == (32, 32, 32)
    assert cfg.periodicity == (True, True, True)
    assert cfg.topologies == []
    assert cfg.steps == 0
    assert cfg.operator == "cumulant"
    assert cfg.precision == "double"
    assert cfg.workers == 1
    assert cfg.boundary_kind == "periodic"
    assert cfg.block_dims == (32, 32, 32)
    assert cfg.probes == [] and cfg.machine is None


def test_defaults_fill_fluid_and_resolution():
    cfg = parse_config(MINIMAL)
    assert cfg.density == 1.225
    assert cfg.kinematic_viscosity == 1.48e-5
    assert cfg.wind == (10.0, 0.0, 0.0)
    assert cfg.reference_velocity == 10.0
    assert cfg.cells_per_diameter == 32
    assert cfg.units.dx == cfg.reference_diameter / cfg.cells_per_diameter


def test_unknown_top_level_key_is_named():
    with pytest.raises(ConfigError, match="wibble"):
        parse_config({"domain": {"cells": [8, 8, 8]}, "wibble": 1})


def test_unknown_nested_keys_are_named():
    with pytest.raises(ConfigError, match="windy"):
        parse_config(dict(MINIMAL, fluid={"windy": [1, 0, 0]}))
    with pytest.raises(ConfigError, match="colision"):
        parse_config(dict(MINIMAL, run={"colision": {}}))
    with pytest.raises(ConfigError, match="spacing"):
        parse_config(dict(MINIMAL, resolution={"spacing": 0.1}))


def test_domain_size_is_required_and_exclusive():
    with pytest.raises(ConfigError, match="domain"):
        parse_config({})
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config({"domain": {"cells": [8, 8, 8], "diameters": [1, 1, 1]}})
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config({"domain": {"periodicity": [True, True, True]}})


def test_diameter_domain_resolves_to_cells_without_allocating():
    cfg = parse_config({
        "domain": {"diameters": [25, 5, 5]},
        "resolution": {"cells_per_diameter": 64, "reference_diameter": 4.5,
                       "mach": 0.1},
        "fluid": {"wind": [15.0, 0.0, 0.0]},
    })
    assert cfg.cells == (1600, 320, 320)
    assert cfg.units.dx == pytest.approx(4.5 / 64)


def test_too_high_mach_is_rejected_with_a_stability_message():
    with pytest.raises(ConfigError, match="lattice speed"):
        parse_config(dict(MINIMAL, resolution={"mach": 0.5}))


def test_indivisible_block_dims_rejected():
    with pytest.raises(ConfigError, match="block_dims"):
        parse_config(dict(MINIMAL, run={"block_dims": [12, 32, 32]}))


def test_inflow_boundary_requires_aperiodic_x():
    with pytest.raises(ConfigError, match="periodicity"):
        parse_config(dict(MINIMAL, run={"boundary":
                                        "velocity_inflow_outflow"}))
    cfg = parse_config({
        "domain": {"cells": [32, 32, 32],
                   "periodicity": [False, True, True]},
        "run": {"boundary": "velocity_inflow_outflow"},
    })
    assert cfg.boundary_kind == "velocity_inflow_outflow"


def test_collision_settings_validated():
    with pytest.raises(ConfigError, match="operator"):
        parse_config(dict(MINIMAL, run={"collision": {"operator": "mrt"}}))
    with pytest.raises(ConfigError, match="4 values"):
        parse_config(dict(MINIMAL,
                          run={"collision": {"higher_order_rates": [1, 1]}}))
    with pytest.raises(ConfigError, match=r"\[0, 2\]"):
        parse_config(dict(MINIMAL, run={"collision":
                                        {"higher_order_rates":
                                         [1, 1, 1, 2.5]}}))


def test_precision_and_curve_validated():
    with pytest.raises(ConfigError, match="precision"):
        parse_config(dict(MINIMAL, run={"precision": "half"}))
    with pytest.raises(ConfigError, match="curve"):
        parse_config(dict(MINIMAL, run={"curve": "peano"}))
    assert parse_config(dict(MINIMAL, run={"precision": "single"})).dtype \
        == np.float32


def test_zero_wind_needs_explicit_reference_velocity():
    with pytest.raises(ConfigError, match="reference_velocity"):
        parse_config(dict(MINIMAL, fluid={"wind": [0.0, 0.0, 0.0]}))
    cfg = parse_config(dict(MINIMAL, fluid={"wind": [0.0, 0.0, 0.0],
                                            "reference_velocity": 5.0}))
    assert cfg.reference_velocity == 5.0


def test_probe_validation():
    with pytest.raises(ConfigError, match="kind"):
        parse_config(dict(MINIMAL,
                          output={"probes": [{"kind": "hotwire"}]}))
    with pytest.raises(ConfigError, match="x_m"):
        parse_config(dict(MINIMAL,
                          output={"probes": [{"kind": "radial_profile"}]}))
    # outside the 1 m domain
    with pytest.raises(ConfigError, match="outside"):
        parse_config(dict(MINIMAL,
                          output={"probes": [{"kind": "radial_profile",
                                              "x_m": 2.0}]}))
    cfg = parse_config(dict(MINIMAL,
                            output={"probes": [{"kind": "axial_line"}]}))
    assert cfg.probes[0].samples == 32   # defaults to the cell count
    assert cfg.probes[0].name == "axial_line0"


def test_blade_loads_probe_needs_a_real_turbine():
    with pytest.raises(ConfigError, match="turbine"):
        parse_config(dict(MINIMAL,
                          output={"probes": [{"kind": "blade_loads",
                                              "turbine": 0}]}))


def test_polar_entries_validated(tmp_path):
    csv = _write(tmp_path, "p.csv", "alpha_deg,cl,cd\n-10,0,0.01\n10,1,0.02\n")
    cfg = parse_config({"domain": {"cells": [8, 8, 8]},
                        "polars": [{"id": "p1", "file": "p.csv"}]},
                       base_dir=str(tmp_path))
    assert "p1" in cfg.polars
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config({"domain": {"cells": [8, 8, 8]},
                      "polars": [{"id": "p1", "file": "p.csv"},
                                 {"id": "p1", "file": "p.csv"}]},
                     base_dir=str(tmp_path))
    with pytest.raises(ConfigError, match="missing.csv"):
        parse_config({"domain": {"cells": [8, 8, 8]},
                      "polars": [{"id": "x", "file": "missing.csv"}]},
                     base_dir=str(tmp_path))
    assert csv  # silence unused warning


FLAT_TURBINE = """
name: rig
components:
  - name: tower
    position: [2.0, 2.0, 0.5]
  - name: hub
    parent: tower
    position: [0.0, 0.0, 1.0]
    rotation: {axis: [1, 0, 0], rate_rpm: 10}
  - name: blade
    parent: hub
    discretization:
      type: line
      points: 3
      r_end: 0.8
      chord: 0.1
      polar: p1
"""


def test_flat_turbine_file_parses_with_parent_references(tmp_path):
    _write(tmp_path, "rig.yaml", FLAT_TURBINE)
    _write(tmp_path, "p.csv", "alpha_deg,cl,cd\n-10,0,0.01\n10,1,0.02\n")
    cfg = parse_config({
        "domain": {"cells": [32, 32, 32]},
        "resolution": {"reference_diameter": 4.0, "cells_per_diameter": 32},
        "polars": [{"id": "p1", "file": "p.csv"}],
        "turbines": [{"file": "rig.yaml", "position": [1.0, 0.0, 0.0]}],
    }, base_dir=str(tmp_path))
    topo = cfg.topologies[0]
    assert [c.name for c in topo.components] == ["tower", "hub", "blade"]
    # placement offset applied to the root
    np.testing.assert_allclose(topo.components[0].world.p, [3.0, 2.0, 0.5])
    assert topo.components[1].rate == pytest.approx(10 * 2 * np.pi / 60)


def test_flat_turbine_rejects_bad_parent_links(tmp_path):
    base = "name: t\ncomponents:\n"
    _write(tmp_path, "dup.yaml",
           base + "  - {name: a}\n  - {name: a, parent: a}\n")
    _write(tmp_path, "orphan.yaml",
           base + "  - {name: a}\n  - {name: b, parent: zz}\n")
    _write(tmp_path, "cycle.yaml",
           base + "  - {name: r}\n  - {name: a, parent: b}\n"
                  "  - {name: b, parent: a}\n")
    _write(tmp_path, "tworoots.yaml",
           base + "  - {name: a}\n  - {name: b}\n")
    domain = {"domain": {"cells": [32, 32, 32]},
              "resolution": {"reference_diameter": 4.0}}
    for fname, msg in [("dup.yaml", "duplicate"), ("orphan.yaml", "unknown"),
                       ("cycle.yaml", "cycle"),
                       ("tworoots.yaml", "exactly one")]:
        with pytest.raises(ConfigError, match=msg):
            parse_config(dict(domain,
                              turbines=[{"file": fname}]),
                         base_dir=str(tmp_path))


def test_turbine_stations_form(tmp_path):
    _write(tmp_path, "st.yaml", """
name: t
components:
  - name: blade
    position: [1.0, 1.0, 1.0]
    discretization:
      type: line
      stations:
        - {r: 0.2, chord: 0.30, twist_deg: 12.0}
        - {r: 0.6, chord: 0.20, twist_deg: 6.0}
        - {r: 1.0, chord: 0.10, twist_deg: 1.0}
""")
    cfg = parse_config({"domain": {"cells": [32, 32, 32]},
                        "resolution": {"reference_diameter": 4.0},
                        "turbines": [{"file": "st.yaml"}]},
                       base_dir=str(tmp_path))
    spec = cfg.topologies[0].components[0].discretization
    np.testing.assert_allclose(spec.offsets[:, 2], [0.2, 0.6, 1.0])
    np.testing.assert_allclose(spec.chord, [0.30, 0.20, 0.10])
    np.testing.assert_allclose(spec.twist, np.deg2rad([12.0, 6.0, 1.0]))


def test_turbine_position_outside_domain_rejected(tmp_path):
    _write(tmp_path, "t.yaml", "name: t\ncomponents:\n  - {name: a}\n")
    with pytest.raises(ConfigError, match="outside"):
        parse_config({"domain": {"cells": [8, 8, 8]},
                      "turbines": [{"file": "t.yaml",
                                    "position": [99.0, 0.0, 0.0]}]},
                     base_dir=str(tmp_path))


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(str(tmp_path / "nope.yaml"))
    bad = _write(tmp_path, "bad.yaml", "domain: [unclosed\n")
    with pytest.raises(ConfigError, match="YAML"):
        parse_config(bad)


def test_echo_round_trips(tmp_path):
    _write(tmp_path, "rig.yaml", FLAT_TURBINE)
    _write(tmp_path, "p.csv", "alpha_deg,cl,cd\n-10,0,0.01\n10,1,0.02\n")
    raw = {
        "name": "echo-check",
        "domain": {"cells": [32, 16, 16],
                   "periodicity": [False, True, True]},
        "fluid": {"density": 1.2, "kinematic_viscosity": 0.01,
                  "wind": [8.0, 0.0, 0.0]},
        "resolution": {"cells_per_diameter": 8, "reference_diameter": 2.0,
                       "mach": 0.08},
        "run": {"steps": 7, "boundary": "velocity_inflow_outflow",
                "block_dims": [16, 16, 16], "workers": 2,
                "precision": "single", "curve": "hilbert"},
        "polars": [{"id": "p1", "file": "p.csv"}],
        "turbines": [{"file": "rig.yaml", "position": [1.0, 0.0, 0.0]}],
        "output": {"directory": "out", "cadence": 5,
                   "probes": [{"kind": "radial_profile", "x_m": 3.0,
                               "samples": 8}]},
        "machine": {"name": "m", "stream_bandwidth_GB_s": 20.0,
                    "peak_tflops": 1.0, "reference_mlups": 50.0,
                    "flops_per_update": 828},
    }
    cfg = parse_config(raw, base_dir=str(tmp_path))
    echo = cfg.echo()
    cfg2 = parse_config(echo, base_dir=str(tmp_path))
    assert cfg2.echo() == echo
    # and the resolved physics is identical
    assert cfg2.units == cfg.units
    assert cfg2.cells == cfg.cells


def test_kernel_flops_override():
    cfg = parse_config(dict(MINIMAL,
                            machine={"stream_bandwidth_GB_s": 100.0,
                                     "flops_per_update": 828}))
    assert cfg.kernel_flops() == 828
    assert parse_config(MINIMAL).kernel_flops() == 900  # cumulant count
