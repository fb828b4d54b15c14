import math

import numpy as np
import pytest

from lbwind.units import UnitError, lattice_units_from_physical


def test_grid_spacing_from_diameter():
    us = lattice_units_from_physical(
        diameter=4.5, cells_per_diameter=64, u_ref=10.0, mach=0.05,
        nu_phys=1.48e-5,
    )
    assert us.dx == pytest.approx(0.0703125, abs=0, rel=1e-14)


def test_lattice_speed_from_mach():
    us = lattice_units_from_physical(4.5, 64, 10.0, 0.05, 1.48e-5)
    assert us.u_lat == pytest.approx(0.05 / math.sqrt(3), rel=1e-14)
    assert us.u_lat == pytest.approx(0.0288675, abs=5e-8)


def test_tau_one_when_nu_lat_is_one_sixth():
    # pick nu_phys so that nu_lat = dx * u_lat / 6 ... solved inline
    D, cpd, u_ref, mach = 4.5, 64, 10.0, 0.05
    dx = D / cpd
    u_lat = mach / math.sqrt(3)
    dt = dx * u_lat / u_ref
    nu_phys = (1.0 / 6.0) * dx**2 / dt
    us = lattice_units_from_physical(D, cpd, u_ref, mach, nu_phys)
    assert us.nu_lat == pytest.approx(1.0 / 6.0, rel=1e-14)
    assert us.tau == pytest.approx(1.0, rel=1e-14)
    assert us.omega == pytest.approx(1.0, rel=1e-14)


def test_dt_definition():
    us = lattice_units_from_physical(4.5, 64, 10.0, 0.05, 1.48e-5)
    assert us.dt == pytest.approx(us.dx * us.u_lat / 10.0, rel=1e-15)
    assert us.nu_lat == pytest.approx(1.48e-5 * us.dt / us.dx**2, rel=1e-15)


def test_velocity_round_trip():
    us = lattice_units_from_physical(4.5, 64, 10.0, 0.05, 1.48e-5)
    u = np.array([15.0, -2.0, 0.3])
    back = us.velocity_to_physical(us.velocity_to_lattice(u))
    assert np.allclose(back, u, rtol=1e-14)
    # the reference speed maps to u_lat by construction
    assert us.velocity_to_lattice(10.0) == pytest.approx(us.u_lat, rel=1e-14)


def test_force_conversion_impulse_consistency():
    # One lattice step of the converted force changes cell momentum by the
    # physical impulse F_phys * dt: F_lat * (rho_ref dx^4 / dt) = F_phys * dt.
    us = lattice_units_from_physical(4.5, 64, 10.0, 0.05, 1.48e-5, rho_ref=1.2)
    F_phys = 37.5
    F_lat = us.force_to_lattice(F_phys)
    assert F_lat * us.rho_ref * us.dx**4 / us.dt == pytest.approx(
        F_phys * us.dt, rel=1e-13
    )
    assert us.force_to_physical(F_lat) == pytest.approx(F_phys, rel=1e-14)


def test_velocity_cap_rejected():
    # mach 0.5 -> u_lat = 0.289 > 0.23: reject at setup
    with pytest.raises(UnitError):
        lattice_units_from_physical(4.5, 64, 10.0, 0.5, 1.48e-5)


def test_invalid_inputs_rejected():
    with pytest.raises(UnitError):
        lattice_units_from_physical(-1.0, 64, 10.0, 0.05, 1.48e-5)
    with pytest.raises(UnitError):
        lattice_units_from_physical(4.5, 64, 0.0, 0.05, 1.48e-5)
    with pytest.raises(UnitError):
        lattice_units_from_physical(4.5, 64, 10.0, 0.05, -2.0)


def test_over_viscous_configuration_rejected():
    # honey-like viscosity at this scale drives tau beyond 2
    with pytest.raises(UnitError, match="tau"):
        lattice_units_from_physical(4.5, 64, 10.0, 0.05, 20.0)
