"""Time-stepping driver.

One Simulation owns the block grid, the per-block fields, the turbine
topologies, and the flat actuator-point registry.  Each step executes, in
this order:

    1. moments           the macroscopic output (rho, u) of the previous
                         step's collision gets its ghost layers refreshed --
                         skipped when no sampling cube touches a ghost cell,
                         which changes nothing observable; the first step
                         samples the initial condition
    2. sample            trilinear flow sampling at every actuator point
    3. forces            blade-element / disk momentum forces; the fluid
                         receives the negated blade force
    4. mark + exchange   route each point (as a serialized record) to every
                         block its kernel support touches
    5. spread            zero the force fields, then deposit the records
    6. collide           BGK or cumulant with the Guo source term
    7. halo exchange     PDF ghost refresh, then the outer boundary
    8. stream            pull streaming into the ghosted interior
    9. kinematics        advance every turbine topology by dt

Steps 1-5 are skipped entirely when there are no actuator points.  All
inter-block traffic goes through the byte protocols, so results are
bitwise independent of the block decomposition and worker count.

Sampling uses the velocity field produced by the previous step, i.e. the
moments of the populations the collision is about to act on.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels
from .actuator import (ActuatorPoint, actuator_disk_forces, angle_of_attack,
                       blade_element_force, interpolate_flow_trilinear,
                       lookup_polar, mark_and_exchange_points, spread_forces)
from .balance import balance_blocks_weighted_sfc
from .blocks import decompose_domain
from .collision import CollisionConfig
from .errors import NumericalAbort
from .fields import PdfField, collide_field, stream
from .halo import (BoundarySpec, apply_outer_boundary, exchange_halos,
                   exchange_macro_halos)
from .output import probe_rows, write_field_vtk, write_probe_csv
from .roofline import (RunTimer, lbm_kernel_cost, lightspeed, measure_mlups,
                       percent_table_row)
from .turbine import DiskSpec, LineSpec

_EX = np.array([1.0, 0.0, 0.0])


class Simulation:
    def __init__(self, cfg):
        self.cfg = cfg
        self.units = cfg.units
        self.grid = decompose_domain(cfg.cells, cfg.block_dims,
                                     cfg.periodicity)
        self._weight_turbine_blocks()
        balance_blocks_weighted_sfc(self.grid, cfg.workers, cfg.curve)
        self.fields = [PdfField(d.size, cfg.dtype, d.origin, d.id)
                       for d in self.grid.blocks]
        self.collision = CollisionConfig(cfg.operator, self.units.omega,
                                         cfg.higher_order_rates)
        wind_lat = self.units.velocity_to_lattice(
            np.asarray(cfg.wind, dtype=np.float64))
        for f in self.fields:
            f.initialize_equilibrium(1.0, wind_lat,
                                     product=(cfg.operator == "cumulant"))
        self.boundary = BoundarySpec(cfg.boundary_kind, u_in_lat=wind_lat)
        self.points, self._line_groups, self._disk_groups = \
            self._build_points()
        self.timer = RunTimer(int(np.prod(cfg.cells)))
        self.step_index = 0
        self._macro_fresh = False
        self._avg = {}  # probe name -> [count, column sums]
        # one batch of blocks per worker, executed in parallel; results are
        # identical for any worker count because blocks never share memory
        owners = {}
        for d in self.grid.blocks:
            owners.setdefault(d.owner, []).append(self.fields[d.id])
        self._batches = [owners[k] for k in sorted(owners)]
        self._pool = (ThreadPoolExecutor(max_workers=cfg.workers)
                      if cfg.workers > 1 else None)

    # -- setup ------------------------------------------------------------

    def _weight_turbine_blocks(self):
        """Bias the balance weights of blocks near any turbine: actuator
        sampling and spreading concentrate there.  Heuristic (bounding box
        in lattice units, two-cell margin, no wrap handling): it only
        shifts the partition, never correctness."""
        bonus = self.cfg.turbine_weight_bonus
        if bonus == 0.0:
            return
        for topo in self.cfg.topologies:
            pts = topo.point_positions()
            if pts.size == 0:
                continue
            lo = pts.min(axis=0) / self.units.dx - 2.0
            hi = pts.max(axis=0) / self.units.dx + 2.0
            for desc in self.grid.blocks:
                o = np.asarray(desc.origin, dtype=np.float64)
                s = np.asarray(desc.size, dtype=np.float64)
                if np.all(hi >= o) and np.all(lo <= o + s):
                    desc.weight += bonus
        # disk sample counts matter too, but the box test above already
        # covers them: disk samples lie inside the point bounding box

    def _build_points(self):
        points = []
        line_groups = []
        disk_groups = []
        gid = 0
        for topo in self.cfg.topologies:
            for comp in topo.components:
                spec = comp.discretization
                if isinstance(spec, LineSpec):
                    start = gid
                    for pi in range(spec.n_points):
                        pid = spec.polar[pi]
                        points.append(ActuatorPoint(
                            gid, np.zeros(3), np.zeros(3),
                            chord=spec.chord[pi],
                            element_length=spec.element_length[pi],
                            twist=spec.twist[pi],
                            polar=self.cfg.polars.get(pid)
                            if pid is not None else None))
                        gid += 1
                    line_groups.append((comp, spec, slice(start, gid)))
                elif isinstance(spec, DiskSpec):
                    offs, areas = spec.sample_offsets()
                    start = gid
                    for si in range(len(areas)):
                        points.append(ActuatorPoint(
                            gid, np.zeros(3), np.zeros(3), area=areas[si]))
                        gid += 1
                    disk_groups.append((comp, spec, offs, areas,
                                        slice(start, gid)))
        return points, line_groups, disk_groups

    # -- per-step pieces ---------------------------------------------------

    def _for_blocks(self, fn):
        if self._pool is None or len(self._batches) == 1:
            for batch in self._batches:
                for fld in batch:
                    fn(fld)
            return

        def run_batch(batch):
            for fld in batch:
                fn(fld)

        list(self._pool.map(run_batch, self._batches))

    def _recompute_moments(self):
        """Full moment refresh from the current populations (output path)."""
        self._for_blocks(lambda fld: _kernels.moments_block(
            fld.f, fld.force, fld.macro, 1.0))
        exchange_macro_halos(self.grid, self.fields)
        self._macro_fresh = True

    def refresh_points(self):
        """Pull positions, velocities, and frames from the topology state."""
        dx = self.units.dx
        L = np.asarray(self.grid.global_dims, dtype=np.float64)
        periodic = np.asarray(self.grid.periodicity, dtype=bool)
        for comp, spec, sl in self._line_groups:
            trs = comp.point_transforms
            vel = comp.point_velocities
            for pi, p in enumerate(self.points[sl]):
                p.position = trs[pi].p.copy()
                p.velocity = vel[pi].copy()
                T = trs[pi].T
                p.e_chord = T @ spec.chord_local
                p.e_normal = T @ spec.normal_local
                p.e_span = T @ spec.span_local
        for comp, spec, offs, areas, sl in self._disk_groups:
            center = comp.point_transforms[0]
            world = center.p[None, :] + offs @ center.T.T
            for si, p in enumerate(self.points[sl]):
                p.position = world[si].copy()
                p.velocity = comp.point_velocities[0].copy()
        for p in self.points:
            lat = p.position / dx
            lat = np.where(periodic, np.mod(lat, L), lat)
            p.position_lat = lat

    def _sampling_needs_ghosts(self):
        """True when some point's interpolation cube touches a ghost cell.

        Only then does sampling read the macro halos; when every cube lies
        strictly inside its owner block's interior the exchange can be
        skipped without changing a single sampled value.
        """
        for p in self.points:
            owner = self.grid.owner_block_of_position(p.position_lat)
            desc = self.grid.blocks[owner]
            j0 = np.floor(p.position_lat - 0.5)
            for k in range(3):
                if (j0[k] < desc.origin[k]
                        or j0[k] + 1 > desc.origin[k] + desc.size[k] - 1):
                    return True
        return False

    def _compute_forces(self):
        for p in self.points:
            owner = self.grid.owner_block_of_position(p.position_lat)
            p.owner_block = owner
            rho, u = interpolate_flow_trilinear(self.fields[owner],
                                                p.position_lat)
            p.sampled_rho = rho
            p.sampled_u = u
        u2p = self.units.velocity_to_physical
        r2p = self.units.density_to_physical
        for comp, spec, sl in self._line_groups:
            for p in self.points[sl]:
                if p.polar is None:
                    p.blade_force = np.zeros(3)
                    p.fluid_force = np.zeros(3)
                    continue
                alpha, speed, e_l, e_d = angle_of_attack(p, u2p(p.sampled_u))
                if speed == 0.0:
                    p.blade_force = np.zeros(3)
                    p.fluid_force = np.zeros(3)
                    continue
                c_l, c_d = lookup_polar(p.polar, alpha)
                blade = blade_element_force(p, r2p(p.sampled_rho), speed,
                                            e_l, e_d, c_l, c_d)
                p.blade_force = blade
                p.fluid_force = -blade
        for comp, spec, offs, areas, sl in self._disk_groups:
            pts = self.points[sl]
            axis = comp.point_transforms[0].T @ _EX
            rho = np.array([r2p(p.sampled_rho) for p in pts])
            u = np.array([u2p(p.sampled_u) for p in pts])
            forces = actuator_disk_forces(spec, axis, rho, u, areas)
            for p, f in zip(pts, forces):
                p.fluid_force = f
                p.blade_force = -f

    def _spread(self):
        per_block = mark_and_exchange_points(self.points, self.grid)
        for fld in self.fields:
            fld.force[...] = 0.0
        for bid, recs in per_block.items():
            if recs:
                spread_forces(recs, self.fields[bid], self.units)

    def _check_finite(self, step):
        for fld in self.fields:
            m = fld.interior_macro
            if np.all(np.isfinite(m)):
                continue
            bad = np.argwhere(~np.isfinite(m))[0]
            cell = tuple(int(fld.origin[k] + bad[k]) for k in range(3))
            raise NumericalAbort(step, cell,
                                 "density" if bad[3] == 0 else "velocity")

    def step(self):
        t = self.timer
        if self.points:
            t.start_phase("turbine")
            # sampling reads the previous step's macroscopic output (the
            # macro field written by its collision; the initial condition
            # on the first step) -- only its ghost layers need refreshing,
            # and only when some interpolation cube actually reaches one
            self.refresh_points()
            if self._sampling_needs_ghosts():
                exchange_macro_halos(self.grid, self.fields)
            self._compute_forces()
            self._spread()
            t.stop_phase()
        t.start_phase("collide")
        self._for_blocks(lambda fld: collide_field(fld, self.collision))
        t.stop_phase()
        self._check_finite(self.step_index)
        t.start_phase("exchange")
        exchange_halos(self.grid, self.fields)
        if self.boundary.kind != "periodic":
            for desc in self.grid.blocks:
                apply_outer_boundary(self.fields[desc.id], self.boundary,
                                     desc, self.grid)
        t.stop_phase()
        t.start_phase("stream")
        self._for_blocks(stream)
        t.stop_phase()
        if self.cfg.topologies:
            t.start_phase("turbine")
            for topo in self.cfg.topologies:
                topo.advance(self.units.dt)
            t.stop_phase()
        t.count_step()
        self.step_index += 1
        # macro (and its ghosts) no longer match the streamed populations
        self._macro_fresh = False

    # -- output ------------------------------------------------------------

    def _probe_tick(self):
        cfg = self.cfg
        if not (cfg.probes or cfg.vtk):
            return
        if not self._macro_fresh:
            self._recompute_moments()
        os.makedirs(cfg.output_dir, exist_ok=True)
        for probe in cfg.probes:
            header, rows = probe_rows(self, probe)
            path = os.path.join(cfg.output_dir,
                                f"{probe.name}_{self.step_index:08d}.csv")
            write_probe_csv(path, header, rows)
            if probe.average_from_step is not None \
                    and self.step_index >= probe.average_from_step:
                count, sums = self._avg.get(probe.name, (0, 0.0))
                count += 1
                sums = sums + rows
                self._avg[probe.name] = (count, sums)
                avg = rows.copy()
                avg[:, 1:] = sums[:, 1:] / count
                write_probe_csv(
                    os.path.join(
                        cfg.output_dir,
                        f"{probe.name}_avg_{self.step_index:08d}.csv"),
                    header, avg)
        if cfg.vtk:
            write_field_vtk(
                os.path.join(cfg.output_dir,
                             f"{cfg.name}_{self.step_index:08d}.vtk"),
                self)

    def run(self):
        """Execute the configured number of steps; returns the run report."""
        cfg = self.cfg
        _kernels.warm_up((cfg.dtype,))
        self.timer.start()
        for _ in range(cfg.steps):
            self.step()
            if cfg.cadence > 0 and self.step_index % cfg.cadence == 0:
                self.timer.stop()
                self._probe_tick()
                self.timer.start()
        self.timer.stop()
        if cfg.cadence == 0 and (cfg.probes or cfg.vtk):
            self._probe_tick()
        report = self.report()
        os.makedirs(cfg.output_dir, exist_ok=True)
        with open(os.path.join(cfg.output_dir, "report.json"), "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
        return report

    def report(self):
        cfg = self.cfg
        cost = lbm_kernel_cost(
            precision_bytes=np.dtype(cfg.dtype).itemsize,
            n_f=cfg.kernel_flops())
        u = self.units
        out = {
            "config": cfg.echo(),
            "units": {"dx_m": u.dx, "dt_s": u.dt, "u_lat": u.u_lat,
                      "nu_lat": u.nu_lat, "tau": u.tau, "omega": u.omega},
            "grid": {"cells": list(cfg.cells),
                     "blocks": len(self.grid.blocks),
                     "block_dims": list(cfg.block_dims),
                     "workers": cfg.workers,
                     "actuator_points": len(self.points)},
            "kernel": dict(cost.to_dict(), operator=cfg.operator,
                           precision=cfg.precision),
            "performance": dict(self.timer.to_dict(),
                                phase_fractions=self.timer.phase_fractions()),
        }
        if self.timer.steps > 0 and self.timer.wall_seconds > 0.0:
            mlups, _ = measure_mlups(self.timer)
            out["performance"]["mlups"] = mlups
            if cfg.machine is not None:
                row = percent_table_row(mlups, cfg.machine, cost)
                out["performance"].update(row)
        if cfg.machine is not None:
            out["machine"] = cfg.machine.to_dict()
            ls = lightspeed(cfg.machine, cost)
            if ls is not None:
                out["machine"]["lightspeed"] = ls
        return out

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None


def run_simulation(cfg):
    """Drive one configured run start to finish; returns the report dict."""
    sim = Simulation(cfg)
    try:
        return sim.run()
    finally:
        sim.close()
