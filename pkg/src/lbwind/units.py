"""Physical <-> lattice unit conversion.

The lattice scales are fixed by three choices: the grid spacing dx (from the
rotor diameter and cells-per-diameter), the lattice Mach number (which sets
the lattice velocity that corresponds to the physical reference speed), and
the reference density rho_ref.  Everything else follows:

    dx     = diameter / cells_per_diameter              [m]
    u_lat  = mach * cs            (cs = 1/sqrt(3))      [-]
    dt     = dx * u_lat / u_ref                         [s]
    nu_lat = nu_phys * dt / dx^2                        [-]
    tau    = nu_lat / cs^2 + 1/2,   omega = 1 / tau     [-]

Conversions:
    velocity: u_phys = u_lat * dx / dt
    point force: F_lat = F_phys * dt^2 / (rho_ref * dx^4)
      (a point force in newtons deposited on the grid becomes a lattice
       force density; one lattice time step of it changes cell momentum by
       exactly the physical impulse F_phys * dt)
"""

from dataclasses import dataclass
import math

from .stencil import CS2

# Above this lattice speed the third-order equilibrium truncation error is no
# longer acceptable; reject the configuration outright.
MAX_LATTICE_SPEED = 0.23


class UnitError(ValueError):
    pass


@dataclass(frozen=True)
class UnitSystem:
    dx: float            # m per cell
    dt: float            # s per step
    u_ref_phys: float    # physical reference speed [m/s]
    mach: float          # lattice Mach number of u_ref_phys
    nu_phys: float       # physical kinematic viscosity [m^2/s]
    rho_ref: float       # kg/m^3 corresponding to lattice density 1
    u_lat: float         # lattice speed of the physical reference speed
    nu_lat: float        # lattice kinematic viscosity
    tau: float           # BGK relaxation time
    omega: float         # relaxation rate 1/tau

    @property
    def velocity_scale(self):
        """m/s per lattice velocity unit."""
        return self.dx / self.dt

    def velocity_to_lattice(self, u_phys):
        return u_phys / self.velocity_scale

    def velocity_to_physical(self, u_lat):
        return u_lat * self.velocity_scale

    def length_to_lattice(self, x_phys):
        return x_phys / self.dx

    def length_to_physical(self, x_lat):
        return x_lat * self.dx

    def time_to_lattice(self, t_phys):
        return t_phys / self.dt

    def force_to_lattice(self, f_phys):
        return f_phys * self.dt**2 / (self.rho_ref * self.dx**4)

    def force_to_physical(self, f_lat):
        return f_lat * self.rho_ref * self.dx**4 / self.dt**2

    def density_to_physical(self, rho_lat):
        return rho_lat * self.rho_ref


def lattice_units_from_physical(
    diameter, cells_per_diameter, u_ref, mach, nu_phys, rho_ref=1.225
):
    """Build the unit system for a rotor-scaled simulation.

    diameter            rotor diameter [m] (resolution reference length)
    cells_per_diameter  grid cells across one diameter
    u_ref               physical reference speed [m/s] (e.g. inflow wind)
    mach                lattice Mach number u_lat/cs for u_ref
    nu_phys             physical kinematic viscosity [m^2/s]
    rho_ref             physical density of lattice density 1 [kg/m^3]
    """
    if diameter <= 0 or cells_per_diameter <= 0:
        raise UnitError("diameter and cells_per_diameter must be positive")
    if u_ref <= 0:
        raise UnitError("reference speed must be positive")
    if nu_phys <= 0:
        raise UnitError("viscosity must be positive")
    cs = math.sqrt(CS2)
    u_lat = mach * cs
    if u_lat > MAX_LATTICE_SPEED:
        raise UnitError(
            f"lattice speed {u_lat:.4f} exceeds {MAX_LATTICE_SPEED} "
            f"(mach {mach:.4f} too high for this discretization)"
        )
    if u_lat <= 0:
        raise UnitError("mach must be positive")
    dx = diameter / cells_per_diameter
    dt = dx * u_lat / u_ref
    nu_lat = nu_phys * dt / dx**2
    tau = nu_lat / CS2 + 0.5
    if tau <= 0.5:
        raise UnitError(
            f"tau = {tau} is not above 0.5 (zero lattice viscosity): "
            "increase resolution or lower mach"
        )
    if tau >= 2.0:
        raise UnitError(
            f"tau = {tau} >= 2 (over-viscous lattice): "
            "decrease resolution or raise mach"
        )
    return UnitSystem(
        dx=dx, dt=dt, u_ref_phys=u_ref, mach=mach, nu_phys=nu_phys,
        rho_ref=rho_ref, u_lat=u_lat, nu_lat=nu_lat, tau=tau, omega=1.0 / tau,
    )
