"""Roofline arithmetic pinned to the published hardware table, plus timer
behavior."""

import time

import numpy as np
import pytest

from lbwind.roofline import (CUMULANT_NF_REFERENCE, KernelCost, MachineSpec,
                             RunTimer, estimated_peak_mlups, lbm_kernel_cost,
                             lightspeed, measure_mlups, percent_table_row)

# reference hardware rows: (stream GB/s, peak TFLOP/s double)
EPYC_7763 = MachineSpec("AMD Epyc 7763", 105.2e9)
A100 = MachineSpec("NVIDIA A100", 1713.0e9, peak_flops=19.5e12)


def test_kernel_cost_single_precision():
    cost = lbm_kernel_cost(precision_bytes=4)
    assert cost.n_b == 228
    assert cost.n_f == CUMULANT_NF_REFERENCE == 828


def test_kernel_cost_double_precision():
    assert lbm_kernel_cost(precision_bytes=8).n_b == 456


def test_kernel_cost_validation():
    with pytest.raises(ValueError):
        lbm_kernel_cost(precision_bytes=2)
    with pytest.raises(ValueError):
        KernelCost(0, 100)


def test_lightspeed_reference_value():
    cost = lbm_kernel_cost(precision_bytes=4)
    l = lightspeed(A100, cost)
    assert round(l, 4) == 0.3190
    assert l < 1.0  # memory-bound


def test_lightspeed_clamps_at_one():
    cost = KernelCost(n_b=228, n_f=10 ** 9)
    assert lightspeed(A100, cost) == 1.0


def test_lightspeed_without_peak_is_assumed():
    assert lightspeed(EPYC_7763, lbm_kernel_cost()) is None


def test_estimated_peak_matches_table():
    cost = lbm_kernel_cost(precision_bytes=4)
    assert round(estimated_peak_mlups(A100, cost), 1) == 7513.2
    assert round(estimated_peak_mlups(EPYC_7763, cost), 1) == 461.4


def test_doubling_traffic_halves_ceiling():
    c1 = KernelCost(228, 828)
    c2 = KernelCost(456, 828)
    assert estimated_peak_mlups(A100, c1) == \
        2 * estimated_peak_mlups(A100, c2)


def test_percent_of_peak_matches_table():
    cost = lbm_kernel_cost(precision_bytes=4)
    # CPU row: 202.1 measured with turbine against 461.4 estimated
    row = percent_table_row(202.1, EPYC_7763, cost)
    assert round(row["percent_of_peak"], 1) == 43.8
    # GPU row: 1677.0 against 7513.2
    row = percent_table_row(1677.0, A100, cost)
    assert round(row["percent_of_peak"], 1) == 22.3


def test_measure_mlups_basic():
    t = RunTimer(cells=10 ** 6)
    t.steps = 100
    t.wall_seconds = 1.0
    mlups, percent = measure_mlups(t)
    assert mlups == 100.0
    assert percent is None
    mlups, percent = measure_mlups(t, estimated=200.0)
    assert percent == 50.0


def test_measure_mlups_errors():
    t = RunTimer(cells=1000)
    with pytest.raises(ValueError):
        measure_mlups(t)           # no steps
    t.steps = 5
    with pytest.raises(ValueError):
        measure_mlups(t)           # zero elapsed


def test_machine_spec_validation():
    with pytest.raises(ValueError):
        MachineSpec("bad", 0.0)
    with pytest.raises(ValueError):
        MachineSpec("bad", 1e9, peak_flops=-1.0)


def test_timer_phases_sum_below_total():
    t = RunTimer(cells=64)
    t.start()
    for _ in range(3):
        t.start_phase("collide")
        time.sleep(0.002)
        t.stop_phase()
        t.start_phase("stream")
        time.sleep(0.001)
        t.stop_phase()
        t.count_step()
    t.stop()
    assert t.steps == 3
    assert t.wall_seconds > 0.0
    assert sum(t.phase_seconds.values()) <= t.wall_seconds
    fr = t.phase_fractions()
    assert sum(fr.values()) <= 1.0
    assert fr["collide"] > 0.0
    mlups, _ = measure_mlups(t)
    assert mlups > 0.0
