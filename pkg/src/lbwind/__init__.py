"""Lattice-Boltzmann wind-turbine wake simulation on block-decomposed grids.

D3Q27 stencil, BGK and cumulant collision with Guo forcing, actuator-line
and actuator-disk turbine models coupled through a compact delta kernel,
space-filling-curve load balancing, and roofline performance accounting.
"""

from .actuator import (ActuatorPoint, actuator_disk_forces, angle_of_attack,
                       blade_element_force, interpolate_flow_trilinear,
                       mark_and_exchange_points, roma_delta_weight,
                       spread_forces)
from .balance import balance_blocks_weighted_sfc, curve_order, hilbert_key, \
    morton_key
from .blocks import BlockDescriptor, BlockGrid, decompose_domain
from .collision import (CollisionConfig, equilibrium_pdf,
                        macroscopic_moments, product_equilibrium)
from .config import ProbeSpec, RunConfig, parse_config
from .errors import (ConfigError, DegenerateStateError, NumericalAbort,
                     OwnershipError, ProtocolError)
from .fields import PdfField, collide_field, stream
from .halo import (BoundarySpec, apply_outer_boundary, exchange_halos,
                   exchange_macro_halos, pack_halo, unpack_halo)
from .output import gather_global_fields, write_field_vtk, write_probe_csv
from .polars import PolarTable, lookup_polar
from .roofline import (KERNEL_FLOPS, KernelCost, MachineSpec, RunTimer,
                       estimated_peak_mlups, lbm_kernel_cost, lightspeed,
                       measure_mlups)
from .sim import Simulation, run_simulation
from .stencil import C, CS2, OPP, Q, REST, W
from .turbine import (Component, DiskSpec, LineSpec, Transform,
                      TurbineTopology, build_topology, point_velocities,
                      rotation_matrix, update_discretization_tree)
from .units import UnitError, UnitSystem, lattice_units_from_physical

__version__ = "0.1.0"

__all__ = [
    "ActuatorPoint", "BlockDescriptor", "BlockGrid", "BoundarySpec", "C",
    "CS2", "CollisionConfig", "Component", "ConfigError",
    "DegenerateStateError", "DiskSpec", "KERNEL_FLOPS", "KernelCost",
    "LineSpec", "MachineSpec", "NumericalAbort", "OPP", "OwnershipError",
    "PdfField", "PolarTable", "ProbeSpec", "ProtocolError", "Q", "REST",
    "RunConfig", "RunTimer", "Simulation", "Transform", "TurbineTopology",
    "UnitError", "UnitSystem", "W", "actuator_disk_forces",
    "angle_of_attack", "apply_outer_boundary",
    "balance_blocks_weighted_sfc", "blade_element_force", "build_topology",
    "collide_field", "curve_order", "decompose_domain", "equilibrium_pdf",
    "estimated_peak_mlups", "exchange_halos", "exchange_macro_halos",
    "gather_global_fields", "hilbert_key", "interpolate_flow_trilinear",
    "lattice_units_from_physical", "lbm_kernel_cost", "lightspeed",
    "lookup_polar", "macroscopic_moments", "mark_and_exchange_points",
    "measure_mlups", "morton_key", "pack_halo", "parse_config",
    "point_velocities", "product_equilibrium", "roma_delta_weight",
    "rotation_matrix", "run_simulation", "spread_forces", "stream",
    "unpack_halo", "update_discretization_tree", "write_field_vtk",
    "write_probe_csv",
]
