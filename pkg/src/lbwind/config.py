"""Run configuration: strict YAML parsing, validation, defaults.

One file drives a run.  Every key is checked — unknown keys are errors, not
warnings — and all unit conversions happen here, before any field memory is
allocated.  The fully-resolved configuration (defaults materialized) is
echoed into the run report so a run can be reproduced from its report.

Top-level sections: domain, fluid, resolution, run, turbines, polars,
output, machine.  Only the domain size (and any turbine files) have no
default; a minimal config is

    domain:
      cells: [32, 32, 32]

which runs a periodic 32^3 box with no turbines.
"""

import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigError
from .polars import PolarTable
from .roofline import KERNEL_FLOPS, MachineSpec
from .turbine import build_topology
from .units import UnitError, UnitSystem, lattice_units_from_physical

_PRECISIONS = {"double": np.float64, "single": np.float32}
_BOUNDARIES = ("periodic", "velocity_inflow_outflow")
_PROBE_KINDS = ("axial_line", "radial_profile", "blade_loads")


@dataclass
class ProbeSpec:
    kind: str
    name: str
    samples: int = 0
    x_m: float = 0.0          # radial_profile: sampling plane
    y_m: float = None         # axial_line: line position (default: center)
    z_m: float = None
    turbine: int = 0          # blade_loads: topology index
    component: str = ""       # blade_loads: component name
    average_from_step: int = None  # optional running time average


@dataclass
class RunConfig:
    name: str
    cells: tuple
    periodicity: tuple
    density: float
    kinematic_viscosity: float
    wind: tuple
    reference_velocity: float
    cells_per_diameter: int
    reference_diameter: float
    mach: float
    steps: int
    operator: str
    higher_order_rates: tuple
    boundary_kind: str
    block_dims: tuple
    workers: int
    deterministic: bool
    precision: str
    curve: str
    turbine_weight_bonus: float
    turbines: list            # [(definition dict, position (3,), file)]
    polar_files: dict         # id -> path
    output_dir: str
    cadence: int
    vtk: bool
    probes: list
    machine: MachineSpec = None
    reference_mlups: float = None
    machine_flops: int = None   # roofline n_f override (foreign kernels)
    # resolved objects
    units: UnitSystem = None
    polars: dict = field(default_factory=dict)
    topologies: list = field(default_factory=list)
    config_path: str = ""

    @property
    def dtype(self):
        return _PRECISIONS[self.precision]

    def domain_length_m(self):
        return tuple(c * self.units.dx for c in self.cells)

    def echo(self):
        """The fully-resolved configuration as plain data (report echo)."""
        out = {
            "name": self.name,
            "domain": {"cells": list(self.cells),
                       "periodicity": list(self.periodicity)},
            "fluid": {"density": self.density,
                      "kinematic_viscosity": self.kinematic_viscosity,
                      "wind": list(self.wind),
                      "reference_velocity": self.reference_velocity},
            "resolution": {"cells_per_diameter": self.cells_per_diameter,
                           "reference_diameter": self.reference_diameter,
                           "mach": self.mach},
            "run": {"steps": self.steps,
                    "collision": {"operator": self.operator,
                                  "higher_order_rates":
                                      list(self.higher_order_rates)},
                    "boundary": self.boundary_kind,
                    "block_dims": list(self.block_dims),
                    "workers": self.workers,
                    "deterministic": self.deterministic,
                    "precision": self.precision,
                    "curve": self.curve,
                    "turbine_weight_bonus": self.turbine_weight_bonus},
            "turbines": [{"file": path, "position": list(pos)}
                         for _, pos, path in self.turbines],
            "polars": [{"id": pid, "file": path}
                       for pid, path in sorted(self.polar_files.items())],
            "output": {"directory": self.output_dir,
                       "cadence": self.cadence,
                       "vtk": self.vtk,
                       "probes": [_probe_echo(p) for p in self.probes]},
        }
        if self.machine is not None:
            m = {"name": self.machine.name,
                 "stream_bandwidth_GB_s":
                     self.machine.stream_bytes_per_s / 1e9}
            if self.machine.peak_flops is not None:
                m["peak_tflops"] = self.machine.peak_flops / 1e12
            if self.reference_mlups is not None:
                m["reference_mlups"] = self.reference_mlups
            if self.machine_flops is not None:
                m["flops_per_update"] = self.machine_flops
            out["machine"] = m
        return out

    def kernel_flops(self):
        """n_f for roofline arithmetic: the implementation's per-cell count,
        unless the machine section pins a foreign kernel's count."""
        if self.machine_flops is not None:
            return self.machine_flops
        return KERNEL_FLOPS[self.operator]


def _probe_echo(p):
    out = {"kind": p.kind, "name": p.name}
    if p.kind in ("axial_line", "radial_profile"):
        out["samples"] = p.samples
    if p.kind == "radial_profile":
        out["x_m"] = p.x_m
    if p.y_m is not None:
        out["y_m"] = p.y_m
    if p.z_m is not None:
        out["z_m"] = p.z_m
    if p.kind == "blade_loads":
        out["turbine"] = p.turbine
        out["component"] = p.component
    if p.average_from_step is not None:
        out["average_from_step"] = p.average_from_step
    return out


def _require_mapping(obj, where):
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected a mapping")
    return obj


def _check_keys(section, allowed, where):
    extra = set(section) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")


def _vec3(value, where, kind=float):
    try:
        out = tuple(kind(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected 3 numbers")
    if len(out) != 3:
        raise ConfigError(f"{where}: expected exactly 3 values")
    return out


def _positive(value, where):
    v = float(value)
    if not v > 0.0 or not np.isfinite(v):
        raise ConfigError(f"{where}: must be positive and finite")
    return v


def parse_config(path_or_dict, base_dir=None):
    """Parse and fully validate a run configuration.

    Accepts a YAML file path or an already-loaded mapping (for tests).
    Raises ConfigError naming the offending key on any problem.
    """
    if isinstance(path_or_dict, dict):
        raw = path_or_dict
        cfg_path = ""
        base = base_dir or "."
    else:
        cfg_path = os.fspath(path_or_dict)
        try:
            with open(cfg_path, "r") as fh:
                raw = yaml.safe_load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {cfg_path}")
        except yaml.YAMLError as e:
            raise ConfigError(f"config file {cfg_path} is not valid YAML: {e}")
        base = base_dir or os.path.dirname(os.path.abspath(cfg_path))
    raw = _require_mapping(raw, "config")
    _check_keys(raw, ("name", "domain", "fluid", "resolution", "run",
                      "turbines", "polars", "output", "machine"), "config")

    name = str(raw.get("name", "run"))

    # --- resolution (needed to interpret domain diameters) ---
    res = _require_mapping(raw.get("resolution"), "resolution")
    _check_keys(res, ("cells_per_diameter", "reference_diameter", "mach"),
                "resolution")
    cpd = int(res.get("cells_per_diameter", 32))
    if cpd < 4:
        raise ConfigError("resolution.cells_per_diameter: must be >= 4")
    ref_d = _positive(res.get("reference_diameter", 1.0),
                      "resolution.reference_diameter")
    mach = _positive(res.get("mach", 0.05), "resolution.mach")

    # --- domain ---
    dom = raw.get("domain")
    if dom is None:
        raise ConfigError("domain: section is required (no default size)")
    dom = _require_mapping(dom, "domain")
    _check_keys(dom, ("cells", "diameters", "periodicity"), "domain")
    if ("cells" in dom) == ("diameters" in dom):
        raise ConfigError("domain: give exactly one of cells or diameters")
    if "cells" in dom:
        cells = _vec3(dom["cells"], "domain.cells", int)
    else:
        diam = _vec3(dom["diameters"], "domain.diameters")
        cells = tuple(int(round(d * cpd)) for d in diam)
    for c in cells:
        if c < 4:
            raise ConfigError(f"domain: {cells} has a side below 4 cells")
    periodicity = tuple(bool(p) for p in
                        dom.get("periodicity", (True, True, True)))
    if len(periodicity) != 3:
        raise ConfigError("domain.periodicity: expected 3 booleans")

    # --- fluid ---
    fl = _require_mapping(raw.get("fluid"), "fluid")
    _check_keys(fl, ("density", "kinematic_viscosity", "wind",
                     "reference_velocity"), "fluid")
    density = _positive(fl.get("density", 1.225), "fluid.density")
    nu = _positive(fl.get("kinematic_viscosity", 1.48e-5),
                   "fluid.kinematic_viscosity")
    wind = _vec3(fl.get("wind", (10.0, 0.0, 0.0)), "fluid.wind")
    u_ref = fl.get("reference_velocity")
    if u_ref is None:
        u_ref = float(np.linalg.norm(wind))
    if not u_ref > 0.0:
        raise ConfigError(
            "fluid.reference_velocity: must be positive (set it explicitly "
            "when the wind vector is zero)")

    # --- run ---
    run = _require_mapping(raw.get("run"), "run")
    _check_keys(run, ("steps", "collision", "boundary", "block_dims",
                      "workers", "deterministic", "precision", "curve",
                      "turbine_weight_bonus"), "run")
    steps = int(run.get("steps", 0))
    if steps < 0:
        raise ConfigError("run.steps: must be >= 0")
    coll = _require_mapping(run.get("collision"), "run.collision")
    _check_keys(coll, ("operator", "higher_order_rates"), "run.collision")
    operator = str(coll.get("operator", "cumulant"))
    if operator not in KERNEL_FLOPS:
        raise ConfigError(
            f"run.collision.operator: unknown operator {operator!r} "
            f"(choose from {sorted(KERNEL_FLOPS)})")
    rates = coll.get("higher_order_rates", (1.0, 1.0, 1.0, 1.0))
    try:
        rates = tuple(float(r) for r in rates)
    except (TypeError, ValueError):
        raise ConfigError("run.collision.higher_order_rates: expected numbers")
    if len(rates) != 4:
        raise ConfigError(
            "run.collision.higher_order_rates: expected 4 values "
            "(orders 3..6)")
    for r in rates:
        if not 0.0 <= r <= 2.0:
            raise ConfigError(
                "run.collision.higher_order_rates: values must be in [0, 2]")
    boundary = str(run.get("boundary", "periodic"))
    if boundary not in _BOUNDARIES:
        raise ConfigError(f"run.boundary: unknown kind {boundary!r}")
    if boundary == "velocity_inflow_outflow" and periodicity[0]:
        raise ConfigError(
            "run.boundary: velocity_inflow_outflow needs "
            "domain.periodicity [false, ...] along x")
    block_dims = _vec3(run.get("block_dims", cells), "run.block_dims", int)
    for g, b in zip(cells, block_dims):
        if b < 1 or g % b != 0:
            raise ConfigError(
                f"run.block_dims: {block_dims} does not divide domain "
                f"{cells}")
    workers = int(run.get("workers", 1))
    if workers < 1:
        raise ConfigError("run.workers: must be >= 1")
    deterministic = bool(run.get("deterministic", True))
    precision = str(run.get("precision", "double"))
    if precision not in _PRECISIONS:
        raise ConfigError("run.precision: choose double or single")
    curve = str(run.get("curve", "morton"))
    if curve not in ("morton", "hilbert"):
        raise ConfigError("run.curve: choose morton or hilbert")
    weight_bonus = float(run.get("turbine_weight_bonus", 0.5))
    if weight_bonus < 0.0:
        raise ConfigError("run.turbine_weight_bonus: must be >= 0")

    # --- units (validates tau / lattice speed) ---
    try:
        units = lattice_units_from_physical(
            diameter=ref_d, cells_per_diameter=cpd, u_ref=u_ref, mach=mach,
            nu_phys=nu, rho_ref=density)
    except UnitError as e:
        raise ConfigError(f"resolution: {e}")

    domain_m = tuple(c * units.dx for c in cells)

    # --- polars ---
    polar_files = {}
    polars = {}
    for i, entry in enumerate(raw.get("polars") or []):
        entry = _require_mapping(entry, f"polars[{i}]")
        _check_keys(entry, ("id", "file"), f"polars[{i}]")
        if "id" not in entry or "file" not in entry:
            raise ConfigError(f"polars[{i}]: needs id and file")
        pid = str(entry["id"])
        if pid in polar_files:
            raise ConfigError(f"polars[{i}]: duplicate id {pid!r}")
        fpath = os.path.join(base, entry["file"])
        polar_files[pid] = entry["file"]
        polars[pid] = PolarTable.from_csv(fpath, id=pid)

    # --- turbines ---
    turbines = []
    topologies = []
    for i, entry in enumerate(raw.get("turbines") or []):
        entry = _require_mapping(entry, f"turbines[{i}]")
        _check_keys(entry, ("file", "position"), f"turbines[{i}]")
        if "file" not in entry:
            raise ConfigError(f"turbines[{i}]: needs a definition file")
        tpath = os.path.join(base, entry["file"])
        try:
            with open(tpath, "r") as fh:
                defn = yaml.safe_load(fh)
        except FileNotFoundError:
            raise ConfigError(f"turbines[{i}]: file not found: {tpath}")
        except yaml.YAMLError as e:
            raise ConfigError(f"turbines[{i}]: invalid YAML: {e}")
        pos = _vec3(entry.get("position", (0.0, 0.0, 0.0)),
                    f"turbines[{i}].position")
        for k in range(3):
            if not 0.0 <= pos[k] <= domain_m[k]:
                raise ConfigError(
                    f"turbines[{i}].position: {pos} outside the domain "
                    f"{domain_m}")
        topo = build_topology(defn, polars=polars)
        topo.root.relative.p = topo.root.relative.p + np.asarray(pos)
        topo.advance(0.0)
        turbines.append((defn, pos, entry["file"]))
        topologies.append(topo)

    # --- output ---
    out = _require_mapping(raw.get("output"), "output")
    _check_keys(out, ("directory", "cadence", "vtk", "probes"), "output")
    output_dir = str(out.get("directory", "out"))
    cadence = int(out.get("cadence", 0))
    if cadence < 0:
        raise ConfigError("output.cadence: must be >= 0")
    vtk = bool(out.get("vtk", False))
    probes = []
    for i, entry in enumerate(out.get("probes") or []):
        probes.append(_parse_probe(entry, i, cells, domain_m, topologies))

    # --- machine ---
    machine = None
    reference_mlups = None
    machine_flops = None
    if raw.get("machine") is not None:
        m = _require_mapping(raw["machine"], "machine")
        _check_keys(m, ("name", "stream_bandwidth_GB_s", "peak_tflops",
                        "reference_mlups", "flops_per_update"), "machine")
        if "stream_bandwidth_GB_s" not in m:
            raise ConfigError("machine: needs stream_bandwidth_GB_s")
        peak = m.get("peak_tflops")
        try:
            machine = MachineSpec(
                m.get("name", "machine"),
                float(m["stream_bandwidth_GB_s"]) * 1e9,
                None if peak is None else float(peak) * 1e12)
        except ValueError as e:
            raise ConfigError(f"machine: {e}")
        if m.get("reference_mlups") is not None:
            reference_mlups = _positive(m["reference_mlups"],
                                        "machine.reference_mlups")
        if m.get("flops_per_update") is not None:
            machine_flops = int(m["flops_per_update"])
            if machine_flops < 1:
                raise ConfigError("machine.flops_per_update: must be >= 1")

    return RunConfig(
        name=name, cells=cells, periodicity=periodicity, density=density,
        kinematic_viscosity=nu, wind=wind, reference_velocity=u_ref,
        cells_per_diameter=cpd, reference_diameter=ref_d, mach=mach,
        steps=steps, operator=operator, higher_order_rates=rates,
        boundary_kind=boundary, block_dims=block_dims, workers=workers,
        deterministic=deterministic, precision=precision, curve=curve,
        turbine_weight_bonus=weight_bonus, turbines=turbines,
        polar_files=polar_files, output_dir=output_dir, cadence=cadence,
        vtk=vtk, probes=probes, machine=machine,
        reference_mlups=reference_mlups, machine_flops=machine_flops,
        units=units, polars=polars, topologies=topologies,
        config_path=cfg_path)


def _parse_probe(entry, i, cells, domain_m, topologies):
    where = f"output.probes[{i}]"
    entry = _require_mapping(entry, where)
    kind = entry.get("kind")
    if kind not in _PROBE_KINDS:
        raise ConfigError(
            f"{where}.kind: choose from {list(_PROBE_KINDS)}, got {kind!r}")
    common = {"kind", "name", "average_from_step"}
    if kind == "axial_line":
        _check_keys(entry, common | {"samples", "y_m", "z_m"}, where)
        samples = int(entry.get("samples", cells[0]))
    elif kind == "radial_profile":
        _check_keys(entry, common | {"samples", "x_m", "z_m"}, where)
        if "x_m" not in entry:
            raise ConfigError(f"{where}: radial_profile needs x_m")
        samples = int(entry.get("samples", cells[1]))
    else:
        _check_keys(entry, common | {"turbine", "component"}, where)
        samples = 0
    if kind in ("axial_line", "radial_profile") and samples < 1:
        raise ConfigError(f"{where}.samples: must be >= 1")

    p = ProbeSpec(kind=kind,
                  name=str(entry.get("name", f"{kind}{i}")),
                  samples=samples)
    if kind == "radial_profile":
        p.x_m = float(entry["x_m"])
        if not 0.0 <= p.x_m <= domain_m[0]:
            raise ConfigError(f"{where}.x_m: {p.x_m} outside the domain")
    if entry.get("y_m") is not None:
        p.y_m = float(entry["y_m"])
        if not 0.0 <= p.y_m <= domain_m[1]:
            raise ConfigError(f"{where}.y_m: outside the domain")
    if entry.get("z_m") is not None:
        p.z_m = float(entry["z_m"])
        if not 0.0 <= p.z_m <= domain_m[2]:
            raise ConfigError(f"{where}.z_m: outside the domain")
    if kind == "blade_loads":
        p.turbine = int(entry.get("turbine", 0))
        if not 0 <= p.turbine < len(topologies):
            raise ConfigError(f"{where}.turbine: no turbine {p.turbine}")
        p.component = str(entry.get("component", ""))
        names = [c.name for c in topologies[p.turbine].components]
        if p.component and p.component not in names:
            raise ConfigError(
                f"{where}.component: {p.component!r} not in {names}")
    if entry.get("average_from_step") is not None:
        p.average_from_step = int(entry["average_from_step"])
    return p
