"""Flow <-> turbine coupling.

Actuator points live at world positions; each step they sample the flow by
trilinear interpolation, turn it into blade-element (or disk) forces, and
spread the reaction onto the lattice through the compact Roma kernel
(support 1.5 cells).  Points whose kernel support crosses a block boundary
are exchanged between blocks as serialized records; every block then
deposits, in global point order, exactly the contributions that land in
its own interior cells, so any block decomposition produces bitwise the
same force field.

Positions handed to sampling/spreading are in lattice cell units; cell j's
center sits at coordinate j + 0.5.  Records shipped across a periodic wrap
carry positions shifted by the signed number of domain crossings times the
domain length, so the receiving block evaluates kernel weights with exactly
the same floating-point inputs everywhere.

Sign convention: ActuatorPoint.fluid_force is the force applied TO THE
FLUID (newtons); blade_element_force returns the force ON THE BLADE, so
the driver negates it before spreading.
"""

import struct

import numpy as np

from .errors import ConfigError, OwnershipError, ProtocolError
from .polars import lookup_polar  # noqa: F401  (re-exported coupling API)

DEGENERATE_SPEED = 1e-12  # m/s


class ActuatorPoint:
    """One force-carrying point of a line or disk discretization."""

    __slots__ = ("global_id", "position", "velocity", "chord",
                 "element_length", "twist", "e_chord", "e_normal", "e_span",
                 "polar", "area", "owner_block", "position_lat",
                 "sampled_rho", "sampled_u", "fluid_force", "blade_force")

    def __init__(self, global_id, position, velocity, chord=0.0,
                 element_length=0.0, twist=0.0, frame=None, polar=None,
                 area=0.0):
        self.global_id = int(global_id)
        self.position = np.asarray(position, dtype=np.float64)
        self.velocity = np.asarray(velocity, dtype=np.float64)
        self.chord = float(chord)
        self.element_length = float(element_length)
        self.twist = float(twist)
        if frame is None:
            frame = np.eye(3)
        frame = np.asarray(frame, dtype=np.float64)
        self.e_chord = frame[0].copy()
        self.e_normal = frame[1].copy()
        self.e_span = frame[2].copy()
        self.polar = polar
        self.area = float(area)
        self.owner_block = -1
        self.position_lat = np.zeros(3)
        self.sampled_rho = 0.0
        self.sampled_u = np.zeros(3)
        self.fluid_force = np.zeros(3)
        self.blade_force = np.zeros(3)


# ---------------------------------------------------------------------------
# sampling


def interpolate_flow_trilinear(field, x_lat):
    """Density and velocity at a global lattice position by trilinear
    interpolation of the 2x2x2 surrounding cell centers.

    `field` must be the block owning (or ghost-covering) the position;
    a support cube leaving the block's ghosted extent is a protocol bug.
    """
    x = np.asarray(x_lat, dtype=np.float64)
    j0 = np.floor(x - 0.5).astype(np.int64)
    t = x - 0.5 - j0
    ox, oy, oz = field.origin
    lx, ly, lz = j0[0] - ox + 1, j0[1] - oy + 1, j0[2] - oz + 1
    nx, ny, nz = field.size
    if not (0 <= lx <= nx and 0 <= ly <= ny and 0 <= lz <= nz):
        raise OwnershipError(
            f"sampling cube at lattice position {x.tolist()} leaves block "
            f"{field.block_id} (origin {field.origin}, size {field.size})")
    cube = field.macro[lx:lx + 2, ly:ly + 2, lz:lz + 2, :]
    wx = np.array([1.0 - t[0], t[0]])
    wy = np.array([1.0 - t[1], t[1]])
    wz = np.array([1.0 - t[2], t[2]])
    w = wx[:, None, None] * wy[None, :, None] * wz[None, None, :]
    vals = np.einsum("xyz,xyzc->c", w, cube)
    return float(vals[0]), vals[1:4].copy()


# ---------------------------------------------------------------------------
# kernel


def roma_delta_weight(r):
    """Compact discrete delta kernel, support |r| <= 1.5 cell units."""
    scalar = np.isscalar(r) or np.ndim(r) == 0
    a = np.abs(np.atleast_1d(np.asarray(r, dtype=np.float64)))
    out = np.zeros_like(a)
    inner = a <= 0.5
    outer = (a > 0.5) & (a <= 1.5)
    out[inner] = (1.0 + np.sqrt(1.0 - 3.0 * a[inner] ** 2)) / 3.0
    out[outer] = (5.0 - 3.0 * a[outer]
                  - np.sqrt(1.0 - 3.0 * (1.0 - a[outer]) ** 2)) / 6.0
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# blade-element aerodynamics


def angle_of_attack(point, u_sampled):
    """(alpha, |u_rel| in the section plane, e_L, e_D).

    The relative wind is the sampled flow minus the point velocity,
    projected onto the chord/normal plane (spanwise component dropped).
    alpha is the flow angle measured from the chord line minus the local
    twist+pitch.  e_D points along the projected relative wind; e_L is e_D
    rotated a quarter turn toward the normal.
    """
    u_rel = np.asarray(u_sampled, dtype=np.float64) - point.velocity
    u_plane = u_rel - (u_rel @ point.e_span) * point.e_span
    speed = float(np.linalg.norm(u_plane))
    if speed < DEGENERATE_SPEED:
        return 0.0, 0.0, np.zeros(3), np.zeros(3)
    phi = float(np.arctan2(u_plane @ point.e_normal, u_plane @ point.e_chord))
    alpha = phi - point.twist
    e_d = u_plane / speed
    e_l = np.cross(point.e_span, e_d)
    return alpha, speed, e_l, e_d


def blade_element_force(point, rho, u_rel, e_l, e_d, c_l, c_d):
    """Blade section force: 1/2 rho u_rel^2 w l (C_L e_L + C_D e_D), N.

    This is the force on the BLADE; the fluid receives its negation.
    """
    if not rho > 0.0:
        raise ValueError(f"density must be positive, got {rho}")
    scale = 0.5 * rho * u_rel * u_rel * point.chord * point.element_length
    return scale * (c_l * np.asarray(e_l) + c_d * np.asarray(e_d))


def actuator_disk_forces(spec, axis_world, rho_samples, u_samples, areas):
    """Per-sample axial forces on the FLUID for a uniformly loaded disk.

    Momentum theory per annulus: the ring-averaged axial velocity u_d is an
    induced velocity u_inf (1 - a) with a = (1 - sqrt(1 - C_T)) / 2, so the
    freestream is recovered as u_inf = u_d / (1 - a) and the ring thrust is
    1/2 rho u_inf^2 C_T A_ring, spread over the ring samples by area and
    directed against the flow.
    """
    ct = spec.thrust_coefficient
    if np.any(ct < 0.0) or np.any(ct >= 1.0):
        raise ConfigError(
            f"thrust coefficient must lie in [0, 1), got {ct.tolist()}")
    axis = np.asarray(axis_world, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    rho_samples = np.asarray(rho_samples, dtype=np.float64)
    u_samples = np.asarray(u_samples, dtype=np.float64)
    areas = np.asarray(areas, dtype=np.float64)
    n = spec.rings * spec.sectors
    forces = np.zeros((n, 3))
    u_ax = u_samples @ axis
    for j in range(spec.rings):
        sl = slice(j * spec.sectors, (j + 1) * spec.sectors)
        if ct[j] == 0.0:
            continue
        a = (1.0 - np.sqrt(1.0 - ct[j])) / 2.0
        ring_area = areas[sl].sum()
        u_d = float((u_ax[sl] * areas[sl]).sum() / ring_area)
        rho = float((rho_samples[sl] * areas[sl]).sum() / ring_area)
        u_inf = u_d / (1.0 - a)
        thrust = 0.5 * rho * u_inf * u_inf * ct[j] * ring_area
        direction = -np.sign(u_d) if u_d != 0.0 else 0.0
        per_area = thrust / ring_area
        forces[sl] = direction * per_area * areas[sl][:, None] * axis[None, :]
    return forces


# ---------------------------------------------------------------------------
# spreading


def _deposit_cells(x):
    """Cell indices n0-1..n0+1 and kernel offsets for one axis coordinate."""
    n0 = int(np.floor(x))  # nearest cell center (ties up)
    cells = (n0 - 1, n0, n0 + 1)
    r = (x - (n0 - 0.5), x - (n0 + 0.5), x - (n0 + 1.5))
    return cells, r


def _as_record(p):
    if isinstance(p, tuple):
        return p
    return (p.global_id, p.position_lat, p.fluid_force)


def spread_forces(points, field, units):
    """Deposit point forces onto the block's interior force field.

    `points` are ActuatorPoints or (global id, lattice position, force N)
    records — the block's own points plus everything received via
    mark_and_exchange_points.  Deposits happen in ascending global-id
    order; cells outside this block's interior are skipped (they are some
    other block's responsibility).  The force field accumulates; the
    driver zeroes it at step start.
    """
    records = sorted((_as_record(p) for p in points), key=lambda r: r[0])
    ox, oy, oz = field.origin
    nx, ny, nz = field.size
    force = field.force
    for gid, pos, f_newton in records:
        lo, hi = _support_box(pos)
        if (hi[0] < ox or lo[0] >= ox + nx or hi[1] < oy
                or lo[1] >= oy + ny or hi[2] < oz or lo[2] >= oz + nz):
            raise OwnershipError(
                f"point {gid} at lattice position {np.asarray(pos).tolist()} "
                f"was routed to block {field.block_id} but its kernel "
                "support does not touch that block")
        f_lat = units.force_to_lattice(np.asarray(f_newton, dtype=np.float64))
        cx, rx = _deposit_cells(pos[0])
        cy, ry = _deposit_cells(pos[1])
        cz, rz = _deposit_cells(pos[2])
        wx = [roma_delta_weight(r) for r in rx]
        wy = [roma_delta_weight(r) for r in ry]
        wz = [roma_delta_weight(r) for r in rz]
        for i in range(3):
            lx = cx[i] - ox
            if not 0 <= lx < nx or wx[i] == 0.0:
                continue
            for j in range(3):
                ly = cy[j] - oy
                if not 0 <= ly < ny or wy[j] == 0.0:
                    continue
                wxy = wx[i] * wy[j]
                for k in range(3):
                    lz = cz[k] - oz
                    if not 0 <= lz < nz or wz[k] == 0.0:
                        continue
                    force[lx + 1, ly + 1, lz + 1, :] += (wxy * wz[k]) * f_lat
    return field.force


# ---------------------------------------------------------------------------
# exchange protocol


_REC_HEADER = struct.Struct("<iii")   # source block id, record count, bytes/record
_RECORD = struct.Struct("<q6d")       # global id, position (3), force (3)


def pack_point_records(records, src_block):
    """Serialize (global id, position, force) records into one buffer."""
    parts = [_REC_HEADER.pack(src_block, len(records), _RECORD.size)]
    for gid, pos, f in records:
        parts.append(_RECORD.pack(gid, pos[0], pos[1], pos[2],
                                  f[0], f[1], f[2]))
    return b"".join(parts)


def unpack_point_records(buf):
    """Inverse of pack_point_records; framing errors raise ProtocolError."""
    src, count, rec_size = _REC_HEADER.unpack_from(buf)
    if rec_size != _RECORD.size:
        raise ProtocolError(f"unexpected record size {rec_size}")
    expect = _REC_HEADER.size + count * _RECORD.size
    if len(buf) != expect:
        raise ProtocolError(
            f"point buffer from block {src}: {len(buf)} bytes, "
            f"expected {expect} for {count} records")
    out = []
    for i in range(count):
        vals = _RECORD.unpack_from(buf, _REC_HEADER.size + i * _RECORD.size)
        out.append((vals[0], np.array(vals[1:4]), np.array(vals[4:7])))
    return src, out


def _support_box(pos):
    """Inclusive cell-index bounds of the combined spreading (3x3x3) and
    sampling (2x2x2) supports around a lattice position."""
    lo = np.empty(3, dtype=np.int64)
    hi = np.empty(3, dtype=np.int64)
    for k in range(3):
        n0 = int(np.floor(pos[k]))
        j0 = int(np.floor(pos[k] - 0.5))
        lo[k] = min(n0 - 1, j0)
        hi[k] = max(n0 + 1, j0 + 1)
    return lo, hi


def mark_and_exchange_points(points, grid):
    """Deliver every point to each block whose interior its kernel support
    touches.  Returns {block id: [(global id, shifted position, force N)]},
    each list sorted by global id and including the block's own points.

    A point is sent to a neighbor when the intersection of its support box
    with that neighbor's interior (viewed in the owner's unwrapped frame)
    is nonempty; the shipped position is shifted by the wrap displacement
    so the receiver works in its natural coordinates.
    """
    gdims = np.asarray(grid.global_dims, dtype=np.float64)
    per_block = {desc.id: [] for desc in grid.blocks}
    buffers = {}  # (src, dst) -> list of records

    for p in points:
        gid, pos, force = _as_record(p)
        pos = np.asarray(pos, dtype=np.float64)
        owner = grid.owner_block_of_position(pos)
        if not isinstance(p, tuple):
            p.owner_block = owner
        per_block[owner].append((gid, pos, np.asarray(force, np.float64)))
        lo, hi = _support_box(pos)
        desc = grid.blocks[owner]
        for off, (nbid, wrap) in desc.neighbors.items():
            nb = grid.blocks[nbid]
            hit = True
            for k in range(3):
                blo = nb.origin[k] + wrap[k] * grid.global_dims[k]
                bhi = blo + nb.size[k]
                if hi[k] < blo or lo[k] > bhi - 1:
                    hit = False
                    break
            if hit:
                shifted = pos - np.asarray(wrap, dtype=np.float64) * gdims
                buffers.setdefault((owner, nbid), []).append(
                    (gid, shifted, force))

    for (src, dst), recs in sorted(buffers.items()):
        buf = pack_point_records(recs, src)
        src_check, unpacked = unpack_point_records(buf)
        per_block[dst].extend(unpacked)

    for bid in per_block:
        per_block[bid].sort(key=lambda r: r[0])
    return per_block
