"""Probe CSV and field VTK output.

All values are written in SI units (m, m/s, kg/m^3, N).  Floats are
formatted with repr(), the shortest round-trip representation, so output
files are bit-identical across runs and block decompositions whenever the
underlying state is.

Probe kinds:
    axial_line      u_axial along x through (y, z);  columns x_m,u_axial_m_per_s
    radial_profile  u_axial along y at plane x, height z;
                    columns y_m,u_axial_m_per_s
    blade_loads     per-station blade force per unit span, split into the
                    rotor-axis (normal) and in-plane (tangential) directions;
                    columns r_over_R,f_normal_N_per_m,f_tangential_N_per_m

Field dumps are legacy ASCII VTK STRUCTURED_POINTS on the cell-center
lattice (spacing dx, origin dx/2), data x-fastest, with density, velocity,
and force arrays; the domain periodicity is recorded on the header's title
line.
"""

import numpy as np

from .actuator import interpolate_flow_trilinear
from .errors import ConfigError
from .turbine import LineSpec

AXIAL_HEADER = "x_m,u_axial_m_per_s"
RADIAL_HEADER = "y_m,u_axial_m_per_s"
BLADE_HEADER = "r_over_R,f_normal_N_per_m,f_tangential_N_per_m"


def _sample_velocity(sim, pos_m):
    """Physical velocity at a physical position, sampled trilinearly."""
    lat = np.asarray(pos_m, dtype=np.float64) / sim.units.dx
    L = np.asarray(sim.grid.global_dims, dtype=np.float64)
    periodic = np.asarray(sim.grid.periodicity, dtype=bool)
    lat = np.where(periodic, np.mod(lat, L), lat)
    owner = sim.grid.owner_block_of_position(lat)
    _, u_lat = interpolate_flow_trilinear(sim.fields[owner], lat)
    return sim.units.velocity_to_physical(u_lat)


def probe_rows(sim, probe):
    """(header, rows) for one probe against the current simulation state."""
    Lx, Ly, Lz = sim.cfg.domain_length_m()
    if probe.kind == "axial_line":
        y0 = probe.y_m if probe.y_m is not None else 0.5 * Ly
        z0 = probe.z_m if probe.z_m is not None else 0.5 * Lz
        rows = np.zeros((probe.samples, 2))
        for i in range(probe.samples):
            x = (i + 0.5) * Lx / probe.samples
            rows[i, 0] = x
            rows[i, 1] = _sample_velocity(sim, (x, y0, z0))[0]
        return AXIAL_HEADER, rows
    if probe.kind == "radial_profile":
        z0 = probe.z_m if probe.z_m is not None else 0.5 * Lz
        rows = np.zeros((probe.samples, 2))
        for j in range(probe.samples):
            y = (j + 0.5) * Ly / probe.samples
            rows[j, 0] = y
            rows[j, 1] = _sample_velocity(sim, (probe.x_m, y, z0))[0]
        return RADIAL_HEADER, rows
    if probe.kind == "blade_loads":
        return BLADE_HEADER, _blade_load_rows(sim, probe)
    raise ConfigError(f"unknown probe kind {probe.kind!r}")


def _blade_load_rows(sim, probe):
    topo = sim.cfg.topologies[probe.turbine]
    comp = None
    for c in topo.components:
        if not isinstance(c.discretization, LineSpec):
            continue
        if not probe.component or c.name == probe.component:
            comp = c
            break
    if comp is None:
        raise ConfigError(
            f"probe {probe.name}: no actuator line "
            f"{probe.component or ''!r} on turbine {probe.turbine}")
    sl = next(s for c, _, s in sim._line_groups if c is comp)
    spec = comp.discretization
    r = np.linalg.norm(spec.offsets, axis=1)
    r_max = r.max()
    if r_max == 0.0:
        r_max = 1.0
    axis = comp.world_spin_axis
    axis = np.array([1.0, 0.0, 0.0]) if axis is None else np.asarray(axis)
    pts = sim.points[sl]
    rows = np.zeros((len(pts), 3))
    for i, p in enumerate(pts):
        tangent = np.cross(axis, p.e_span)
        nt = np.linalg.norm(tangent)
        tangent = p.e_chord if nt < 1e-9 else tangent / nt
        rows[i, 0] = r[i] / r_max
        rows[i, 1] = (p.blade_force @ axis) / p.element_length
        rows[i, 2] = (p.blade_force @ tangent) / p.element_length
    return rows


def write_probe_csv(path, header, rows):
    """One CSV per probe per output tick: a header line, then repr floats."""
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in np.asarray(rows, dtype=np.float64):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


# ---------------------------------------------------------------------------
# VTK


def gather_global_fields(sim):
    """Assemble full-domain density (kg/m^3), velocity (m/s), and force (N)
    arrays from the per-block interiors."""
    nx, ny, nz = sim.cfg.cells
    rho = np.zeros((nx, ny, nz))
    vel = np.zeros((nx, ny, nz, 3))
    frc = np.zeros((nx, ny, nz, 3))
    u = sim.units
    for desc in sim.grid.blocks:
        fld = sim.fields[desc.id]
        sl = tuple(slice(o, o + s) for o, s in zip(desc.origin, desc.size))
        m = fld.interior_macro
        rho[sl] = u.density_to_physical(m[..., 0])
        vel[sl] = u.velocity_to_physical(m[..., 1:4])
        frc[sl] = u.force_to_physical(fld.interior_force)
    return rho, vel, frc


def _vtk_scalars(fh, name, arr):
    fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
    for v in arr.transpose(2, 1, 0).ravel():
        fh.write(repr(float(v)) + "\n")


def _vtk_vectors(fh, name, arr):
    fh.write(f"VECTORS {name} double\n")
    for v in arr.transpose(2, 1, 0, 3).reshape(-1, 3):
        fh.write(" ".join(repr(float(c)) for c in v) + "\n")


def write_field_vtk(path, sim):
    """Dump the full flow state as legacy ASCII VTK STRUCTURED_POINTS.

    Point data lives on cell centers: origin dx/2, spacing dx, x fastest.
    """
    rho, vel, frc = gather_global_fields(sim)
    nx, ny, nz = sim.cfg.cells
    dx = sim.units.dx
    per = ",".join(str(int(p)) for p in sim.cfg.periodicity)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{sim.cfg.name} step={sim.step_index} "
                 f"periodicity={per} dx={dx!r}\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx} {ny} {nz}\n")
        fh.write(f"ORIGIN {0.5 * dx!r} {0.5 * dx!r} {0.5 * dx!r}\n")
        fh.write(f"SPACING {dx!r} {dx!r} {dx!r}\n")
        fh.write(f"POINT_DATA {nx * ny * nz}\n")
        _vtk_scalars(fh, "density", rho)
        _vtk_vectors(fh, "velocity", vel)
        _vtk_vectors(fh, "force", frc)
    return path
