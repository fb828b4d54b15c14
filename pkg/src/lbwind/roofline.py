"""Roofline-style performance model and MLUPS instrumentation.

The model treats one lattice cell update as 27 PDF reads, 27 PDF writes,
and 3 force reads (n_b bytes of ideally-cached traffic) against n_f
floating-point operations.  A kernel is memory-bound when its code balance
n_b/n_f exceeds the machine balance P_peak/b_S; the attainable fraction of
peak FLOP/s is the kernel lightspeed min(1, b_S*n_f / (P_peak*n_b)), and
for a memory-bound kernel the expected ceiling is simply P_max = b_S/n_b
cell updates per second.
"""

import time

import numpy as np

# Published per-cell FLOP count for a fully generated cumulant kernel;
# used as the reference cost model input.
CUMULANT_NF_REFERENCE = 828

# FLOP per cell update counted by hand from the per-cell routines in
# _kernels.py (multiply+add counted separately, abs/compare ignored).
KERNEL_FLOPS = {"bgk": 270, "cumulant": 900}


class MachineSpec:
    """Measured stream bandwidth and optional peak FLOP rate."""

    def __init__(self, name, stream_bytes_per_s, peak_flops=None):
        self.name = str(name)
        self.stream_bytes_per_s = float(stream_bytes_per_s)
        self.peak_flops = None if peak_flops is None else float(peak_flops)
        if not self.stream_bytes_per_s > 0.0:
            raise ValueError("stream bandwidth must be positive")
        if self.peak_flops is not None and not self.peak_flops > 0.0:
            raise ValueError("peak FLOP/s must be positive when given")

    def to_dict(self):
        return {"name": self.name,
                "stream_bytes_per_s": self.stream_bytes_per_s,
                "peak_flops": self.peak_flops}


class KernelCost:
    """Bytes and FLOPs per cell update."""

    def __init__(self, n_b, n_f):
        self.n_b = int(n_b)
        self.n_f = int(n_f)
        if self.n_b <= 0 or self.n_f <= 0:
            raise ValueError("kernel cost entries must be positive")

    def to_dict(self):
        return {"bytes_per_update": self.n_b, "flops_per_update": self.n_f}


def lbm_kernel_cost(stencil=27, precision_bytes=4, n_f=CUMULANT_NF_REFERENCE):
    """Ideal per-cell data traffic for a pull-stream kernel:
    (27 reads + 27 writes + 3 force reads) * precision."""
    q = int(getattr(stencil, "Q", stencil))
    if precision_bytes not in (4, 8):
        raise ValueError("precision_bytes must be 4 or 8")
    return KernelCost(n_b=(q + q + 3) * precision_bytes, n_f=n_f)


def lightspeed(machine, cost):
    """Attainable fraction of peak FLOP/s, min(1, b_S*n_f/(P_peak*n_b)).

    Returns None when the machine spec has no peak FLOP rate: the kernel
    is then assumed memory-bound (reported as "assumed < 1").
    """
    if machine.peak_flops is None:
        return None
    value = (machine.stream_bytes_per_s * cost.n_f) \
        / (machine.peak_flops * cost.n_b)
    return min(1.0, value)


def estimated_peak_mlups(machine, cost):
    """Memory-bandwidth ceiling b_S/n_b, in million cell updates/second."""
    return machine.stream_bytes_per_s / cost.n_b / 1e6


def measure_mlups(timer, estimated=None):
    """(measured MLUPS, percent of the estimated ceiling or None)."""
    if timer.steps < 1:
        raise ValueError("need at least one completed step to measure")
    if not timer.wall_seconds > 0.0:
        raise ValueError("elapsed time is zero; nothing to measure")
    mlups = timer.cells * timer.steps / (timer.wall_seconds * 1e6)
    percent = None if estimated is None else 100.0 * mlups / estimated
    return mlups, percent


PHASES = ("collide", "stream", "exchange", "turbine")


class RunTimer:
    """Wall-clock accounting for the time loop, split into phases.

    Only the loop is timed; setup and output fall outside start()/stop().
    Phase times always sum to at most the total (they are disjoint slices
    of the same clock).
    """

    def __init__(self, cells):
        self.cells = int(cells)
        self.steps = 0
        self.wall_seconds = 0.0
        self.phase_seconds = {name: 0.0 for name in PHASES}
        self._t0 = None
        self._phase_t0 = None
        self._phase_name = None

    def start(self):
        self._t0 = time.perf_counter()

    def stop(self):
        if self._t0 is None:
            raise RuntimeError("timer was never started")
        self.wall_seconds += time.perf_counter() - self._t0
        self._t0 = None

    def start_phase(self, name):
        if name not in self.phase_seconds:
            self.phase_seconds[name] = 0.0
        self._phase_name = name
        self._phase_t0 = time.perf_counter()

    def stop_phase(self):
        if self._phase_t0 is None:
            raise RuntimeError("no phase in progress")
        self.phase_seconds[self._phase_name] += \
            time.perf_counter() - self._phase_t0
        self._phase_t0 = None
        self._phase_name = None

    def count_step(self, n=1):
        self.steps += n

    def phase_fractions(self):
        if self.wall_seconds <= 0.0:
            return {name: 0.0 for name in self.phase_seconds}
        return {name: t / self.wall_seconds
                for name, t in self.phase_seconds.items()}

    def to_dict(self):
        return {"cells": self.cells, "steps": self.steps,
                "wall_seconds": self.wall_seconds,
                "phase_seconds": dict(self.phase_seconds)}


def percent_table_row(measured_mlups, machine, cost):
    """The derived cells of a performance report row: estimated ceiling,
    measured MLUPS, and measured-over-estimated percentage."""
    est = estimated_peak_mlups(machine, cost)
    return {"estimated_mlups": est,
            "measured_mlups": measured_mlups,
            "percent_of_peak": 100.0 * measured_mlups / est}
