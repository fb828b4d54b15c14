"""Ghost-layer exchange through byte buffers.

Every exchange — even between two blocks living in the same process —
serializes the boundary slab into a byte buffer and deserializes it on the
receiving side, so a single-process run exercises exactly the data path a
distributed run would.

Buffer layout (little-endian):

  header, 6 int32:  source block id,
                    receiver-side ghost offset (ox, oy, oz),
                    number of values,
                    bytes per value (4 or 8)
  payload:          the slab values in C order over (x, y, z, last axis),
                    i.e. the trailing component/direction index fastest.

The slab a block packs for the neighbor across its side `o` is its own
interior layer adjacent to that side; at the receiver that data fills the
ghost layer on side `-o` (the receiver sees the sender across `-o`).
"""

import struct

import numpy as np

from .collision import equilibrium_pdf
from .errors import ProtocolError

_HEADER = struct.Struct("<6i")

_DTYPE_CODES = {4: np.dtype(np.float32), 8: np.dtype(np.float64)}


def _source_slices(size, offset):
    """Interior slab adjacent to side `offset` of a ghosted array."""
    sl = []
    for n, o in zip(size, offset):
        if o < 0:
            sl.append(slice(1, 2))
        elif o > 0:
            sl.append(slice(n, n + 1))
        else:
            sl.append(slice(1, n + 1))
    return tuple(sl)


def _ghost_slices(size, offset):
    """Ghost slab on side `offset` of a ghosted array."""
    sl = []
    for n, o in zip(size, offset):
        if o < 0:
            sl.append(slice(0, 1))
        elif o > 0:
            sl.append(slice(n + 1, n + 2))
        else:
            sl.append(slice(1, n + 1))
    return tuple(sl)


def pack_halo(arr, size, offset, src_id):
    """Serialize the interior slab of `arr` adjacent to side `offset`.

    `arr` is a ghosted (nx+2, ny+2, nz+2, ncomp) array.  The returned
    buffer is addressed to the neighbor across `offset`, whose ghost side
    is `-offset`.
    """
    slab = np.ascontiguousarray(arr[_source_slices(size, offset)])
    recv_off = (-offset[0], -offset[1], -offset[2])
    header = _HEADER.pack(src_id, recv_off[0], recv_off[1], recv_off[2],
                          slab.size, slab.dtype.itemsize)
    return header + slab.tobytes()


def unpack_halo(arr, size, buf):
    """Fill one ghost slab of `arr` from a byte buffer made by pack_halo."""
    src_id, ox, oy, oz, count, itemsize = _HEADER.unpack_from(buf)
    if itemsize not in _DTYPE_CODES:
        raise ProtocolError(f"unknown value width {itemsize} in halo buffer")
    sl = _ghost_slices(size, (ox, oy, oz))
    dest = arr[sl]
    if dest.size != count:
        raise ProtocolError(
            f"halo buffer from block {src_id} carries {count} values, "
            f"ghost slab at offset {(ox, oy, oz)} holds {dest.size}"
        )
    payload = np.frombuffer(buf, dtype=_DTYPE_CODES[itemsize],
                            offset=_HEADER.size, count=count)
    dest[...] = payload.reshape(dest.shape).astype(arr.dtype, copy=False)
    return src_id, (ox, oy, oz)


def _exchange(grid, arrays):
    """All-to-all ghost refresh of one ghosted array per block."""
    bufs = {}
    for desc in grid.blocks:
        arr = arrays[desc.id]
        for off in desc.neighbors:
            nbid, _ = desc.neighbors[off]
            key = (nbid, (-off[0], -off[1], -off[2]))
            bufs[key] = pack_halo(arr, desc.size, off, desc.id)
    for desc in grid.blocks:
        arr = arrays[desc.id]
        for off in desc.neighbors:
            unpack_halo(arr, desc.size, bufs[(desc.id, off)])


def exchange_halos(grid, fields):
    """Refresh the PDF ghost layers of every block from its neighbors."""
    _exchange(grid, [f.f for f in fields])


def exchange_macro_halos(grid, fields):
    """Refresh the macroscopic-field ghost layers (density + velocity)."""
    _exchange(grid, [f.macro for f in fields])


def exchange_force_halos(grid, fields):
    """Refresh the body-force ghost layers."""
    _exchange(grid, [f.force for f in fields])


class BoundarySpec:
    """Outer-boundary condition along the x axis.

    kind "periodic": nothing to do beyond the wrap links.
    kind "velocity_inflow_outflow": the -x ghost plane is pinned to the
    equilibrium of (rho=1, u_in) and the +x ghost plane copies the adjacent
    interior plane (zero gradient).  Applied after the halo exchange so it
    overrides the periodic wrap data on those planes.
    """

    KINDS = ("periodic", "velocity_inflow_outflow")

    def __init__(self, kind="periodic", u_in_lat=(0.0, 0.0, 0.0)):
        if kind not in self.KINDS:
            raise ValueError(f"unknown boundary kind {kind!r}")
        self.kind = kind
        self.u_in_lat = np.asarray(u_in_lat, dtype=np.float64)

    def __repr__(self):
        return f"BoundarySpec({self.kind!r}, u_in_lat={tuple(self.u_in_lat)})"


def apply_outer_boundary(field, bc, desc, grid):
    """Overwrite the outer ghost planes of a block that touches the global
    -x or +x face, per the boundary spec.  No-op for periodic runs and for
    blocks interior to the x extent."""
    if bc.kind == "periodic":
        return
    bx = desc.block_index[0]
    if bx == 0:
        f_in = equilibrium_pdf(1.0, bc.u_in_lat).astype(field.f.dtype)
        field.f[0, :, :, :] = f_in
        field.macro[0, :, :, 0] = 1.0
        field.macro[0, :, :, 1:4] = bc.u_in_lat
        field.force[0, :, :, :] = 0.0
    if bx == grid.counts[0] - 1:
        field.f[-1, :, :, :] = field.f[-2, :, :, :]
        field.macro[-1] = field.macro[-2]
        field.force[-1] = field.force[-2]
