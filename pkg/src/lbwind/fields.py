"""Per-block field storage and the streaming step.

A PdfField owns one block's arrays, each with a one-cell ghost ring:

    f      (nx+2, ny+2, nz+2, 27)  populations (streaming source)
    f_next (nx+2, ny+2, nz+2, 27)  streaming destination (swapped each step)
    force  (nx+2, ny+2, nz+2, 3)   lattice force density (interior used)
    macro  (nx+2, ny+2, nz+2, 4)   rho, ux, uy, uz from the latest collide

Interior cells are index [1..n] along each axis; the global cell (gx,gy,gz)
of local interior index (x,y,z) is origin + (x-1, y-1, z-1).  Memory layout
is C-order with the direction/component axis fastest, direction ordering per
`stencil`.
"""

import numpy as np

from . import _kernels
from .collision import equilibrium_pdf, product_equilibrium


class PdfField:
    def __init__(self, size, dtype=np.float64, origin=(0, 0, 0), block_id=0):
        nx, ny, nz = (int(s) for s in size)
        if min(nx, ny, nz) < 1:
            raise ValueError("block size must be positive")
        self.size = (nx, ny, nz)
        self.dtype = np.dtype(dtype)
        self.origin = tuple(int(o) for o in origin)
        self.block_id = int(block_id)
        shape = (nx + 2, ny + 2, nz + 2)
        self.f = np.zeros(shape + (27,), self.dtype)
        self.f_next = np.zeros(shape + (27,), self.dtype)
        self.force = np.zeros(shape + (3,), self.dtype)
        self.macro = np.zeros(shape + (4,), self.dtype)
        self.macro[..., 0] = 1.0

    @property
    def interior(self):
        return self.f[1:-1, 1:-1, 1:-1, :]

    @property
    def interior_macro(self):
        return self.macro[1:-1, 1:-1, 1:-1, :]

    @property
    def interior_force(self):
        return self.force[1:-1, 1:-1, 1:-1, :]

    def cell_count(self):
        nx, ny, nz = self.size
        return nx * ny * nz

    def initialize_equilibrium(self, rho, u, product=False):
        """Set interior PDFs to equilibrium at (rho, u) and refresh macro.

        rho: scalar or (nx,ny,nz); u: (3,) or (nx,ny,nz,3), lattice units.
        """
        nx, ny, nz = self.size
        rho_arr = np.broadcast_to(np.asarray(rho, np.float64), (nx, ny, nz))
        u_arr = np.broadcast_to(np.asarray(u, np.float64), (nx, ny, nz, 3))
        eq = product_equilibrium(rho_arr, u_arr) if product \
            else equilibrium_pdf(rho_arr, u_arr)
        self.interior[...] = eq
        self.interior_macro[..., 0] = rho_arr
        self.interior_macro[..., 1:4] = u_arr
        self.force[...] = 0.0


def collide_field(field, cfg, dt=1.0):
    """Collide all interior cells of a block in place; refreshes field.macro."""
    cfg.validate()
    if cfg.operator == "bgk":
        _kernels.collide_bgk_block(
            field.f, field.force, field.macro, float(cfg.omega), float(dt)
        )
    else:
        w3, w4, w5, w6 = (float(r) for r in cfg.higher_order_rates)
        _kernels.collide_cumulant_block(
            field.f, field.force, field.macro,
            float(cfg.omega), w3, w4, w5, w6, float(dt),
        )
    return field


def stream(field):
    """Pull-streaming over the interior; requires populated ghost layer.

    Uses two-field storage: pulls from field.f into field.f_next, then swaps
    the two arrays.  Returns the field.
    """
    _kernels.stream_pull_block(field.f, field.f_next)
    field.f, field.f_next = field.f_next, field.f
    return field
