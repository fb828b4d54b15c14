"""
Actuator-disk wake versus momentum theory
=========================================

An ideal rotor extracting thrust T = 1/2 rho C_T A U^2 slows the flow
through the disk by the induction factor

    a = (1 - sqrt(1 - C_T)) / 2,

which is 0.1464 for C_T = 0.5.  This demo runs the shipped laptop-sized
configuration -- a disk of 8 cells per diameter, 3 diameters behind a
velocity inlet -- and compares the disk-averaged axial velocity against
that prediction.  The same configuration runs from the shell as

    lbwind run demos/data/disk_wake.yaml

(outputs land in ./disk_wake_out either way).
"""

import os

import numpy as np

from lbwind.config import parse_config
from lbwind.output import gather_global_fields
from lbwind.sim import Simulation

here = os.path.dirname(os.path.abspath(__file__))
cfg = parse_config(os.path.join(here, "data", "disk_wake.yaml"))
print(f"grid {cfg.cells} cells, dx = {cfg.units.dx:.4f} m, "
      f"dt = {cfg.units.dt:.3e} s")
print(f"running {cfg.steps} steps (about a minute) ...")

sim = Simulation(cfg)
report = sim.run()
print(f"done at {report['performance']['mlups']:.2f} MLUPS; probe CSVs, "
      f"VTK snapshots and report.json are in ./{cfg.output_dir}/")

# The run wrote an axial centerline probe every 400 steps; print the last
# one as a wake profile.  x is in meters = rotor diameters here (D = 1 m).
rows = np.loadtxt(os.path.join(cfg.output_dir,
                               f"centerline_{cfg.steps:08d}.csv"),
                  delimiter=",", skiprows=1)
wind = cfg.wind[0]
print(f"\n{'x / D':>6} {'u / U_inf':>10}    (centerline)")
for x, u in rows[3::8]:
    print(f"{x:>6.2f} {u / wind:>10.4f}")

# Momentum theory speaks about the average over the rotor area, so gather
# the global velocity field and average the axial component over the disk
# cells at the rotor plane (x = 3 D) and at a reference plane 2 D upstream.
_, velocity, _ = gather_global_fields(sim)
sim.close()
ux = velocity[..., 0]
dx = cfg.units.dx
yc = (np.arange(cfg.cells[1]) + 0.5) * dx - 2.5
zc = (np.arange(cfg.cells[2]) + 0.5) * dx - 2.5
disk_mask = (yc[:, None] ** 2 + zc[None, :] ** 2) <= 0.5 ** 2

def disk_average(x_m):
    return float(ux[int(x_m / dx)][disk_mask].mean())

u_ref = disk_average(1.0)
u_disk = disk_average(3.0)
deficit = 1.0 - u_disk / u_ref
induction = (1.0 - np.sqrt(1.0 - 0.5)) / 2.0
print(f"\ndisk-averaged axial velocity : {u_disk:.3f} m/s "
      f"(inflow reference {u_ref:.3f} m/s)")
print(f"measured velocity deficit    : {deficit:.4f}")
print(f"momentum-theory induction a  : {induction:.4f}")
print("""
At 8 cells per diameter the 3-cell force-smearing kernel widens the
effective rotor by most of a cell, diluting the thrust over a larger
area, so the measured deficit lands short of the ideal-rotor value.
Raise resolution.cells_per_diameter and the gap keeps shrinking: the
coupling converges to momentum theory from below.""")
