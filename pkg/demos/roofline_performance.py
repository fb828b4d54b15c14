"""
Roofline accounting: predicted versus measured MLUPS
====================================================

A lattice-Boltzmann update streams 27 populations in, 27 out, and touches
the 3 force components: 57 values per cell per step.  On any machine with
a known memory bandwidth b that caps the update rate at

    MLUPS_peak = b / (57 * precision_bytes).

With a peak FLOP rate P declared as well, the ratio
"lightspeed" = b * n_f / (P * n_b) says what fraction of P the memory
system can keep fed -- below 1 the kernel is bandwidth-bound and the cap
above is the number to chase.  This demo first runs the arithmetic for
three familiar classes of hardware, then measures this very machine
against its own estimate.
"""

import numpy as np

from lbwind import _kernels
from lbwind.config import parse_config
from lbwind.roofline import (MachineSpec, estimated_peak_mlups,
                             lbm_kernel_cost, lightspeed)
from lbwind.sim import run_simulation

# Per-update kernel cost: bytes follow from the stencil and precision,
# flops default to a counted cumulant kernel (828 per cell update).
cost32 = lbm_kernel_cost(precision_bytes=4)
cost64 = lbm_kernel_cost(precision_bytes=8)
print(f"bytes per cell update: {cost32.n_b} single / "
      f"{cost64.n_b} double, {cost32.n_f} flops")

machines = [
    MachineSpec("laptop, dual-channel DDR5", 105.2e9, None),
    MachineSpec("workstation, 8-channel DDR4", 202.1e9, 3.5e12),
    MachineSpec("HBM2e accelerator", 1713.0e9, 19.5e12),
]
print(f"\n{'machine':<28} {'GB/s':>7} {'MLUPS single':>13} "
      f"{'MLUPS double':>13} {'lightspeed':>11}")
for m in machines:
    ls = lightspeed(m, cost64)
    print(f"{m.name:<28} {m.stream_bytes_per_s / 1e9:>7.1f} "
          f"{estimated_peak_mlups(m, cost32):>13.1f} "
          f"{estimated_peak_mlups(m, cost64):>13.1f} "
          f"{'--' if ls is None else format(ls, '11.4f')}")
print("lightspeed is the fraction of peak FLOP/s the bandwidth can feed: "
      "well\nbelow 1 on all three, so the update is bandwidth-bound "
      "everywhere and the\nMLUPS columns are honest ceilings.")

# Now measure.  Declaring a machine section in the config makes every run
# report percent-of-peak next to the raw MLUPS; 12 GB/s is a deliberately
# round guess for a container sharing one memory controller -- swap in
# your own STREAM number to make percent_of_peak meaningful.
cfg = parse_config({
    "domain": {"cells": [48, 48, 48]},
    "fluid": {"kinematic_viscosity": 1.5e-5, "wind": [8.0, 0.0, 0.0]},
    "run": {"steps": 60, "collision": {"operator": "cumulant"}},
    "machine": {"name": "this container", "stream_bandwidth_GB_s": 12.0},
    "output": {"directory": "roofline_out"},
})
_kernels.warm_up((cfg.dtype,))
report = run_simulation(cfg)
perf = report["performance"]
print(f"\nmeasured on {48 ** 3} cells x 60 steps:")
print(f"  wall seconds     : {perf['wall_seconds']:.3f}")
print(f"  MLUPS            : {perf['mlups']:.2f}")
print(f"  estimated peak   : {perf['estimated_mlups']:.2f} "
      "(from the declared bandwidth)")
print(f"  percent of peak  : {perf['percent_of_peak']:.1f}%")
print("\nphase breakdown (seconds):")
for phase, secs in sorted(report["performance"]["phase_seconds"].items()):
    print(f"  {phase:<10} {secs:.3f}")
print("\nThe same numbers come from the shell without running anything:\n"
      "    lbwind report <config.yaml>   # arithmetic only, instant")
