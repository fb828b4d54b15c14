"""Tree-structured turbine kinematics.

A turbine is a tree of components (tower, nacelle, hub, blades, ...), each
carrying a transform relative to its parent's fix point, an optional steady
rotation about a local axis, and an optional actuator discretization (a
line of blade elements or a disk).  Every step the tree is walked top-down:
a node advances its accumulated rotation, composes its world transform

    T_c = T_p . T_r . R        p_c = p_p + T_p . p_r

updates its discretization points, then recurses into its children.  The
per-point line update applies the same composition with the per-point
relative transform and the component's R once more:

    T^i_c = T^start_c . T^i_r . R      p^i_c = p^start_c + T^start_c . p^i_r

For a rigid spinning rotor the rotation is declared on the hub, so blades
and their point lists have R = I and the extra factor is inert.

World velocities are propagated analytically alongside the transforms:
a node spinning at rate about local axis a adds (T_p . T_r . a) * rate to
the world angular velocity, and a point q rigidly attached to a frame with
angular velocity w moving at v has velocity v + w x (q - frame origin).
"""

import copy

import numpy as np

from .errors import ConfigError

_DRIFT_TOL = 1e-12


# ---------------------------------------------------------------------------
# transforms


class Transform:
    """Position + orthonormal orientation."""

    __slots__ = ("p", "T")

    def __init__(self, p=(0.0, 0.0, 0.0), T=None):
        self.p = np.asarray(p, dtype=np.float64).copy()
        self.T = np.eye(3) if T is None else np.asarray(T, dtype=np.float64).copy()
        if self.p.shape != (3,) or self.T.shape != (3, 3):
            raise ConfigError("transform needs a 3-vector and a 3x3 matrix")

    @staticmethod
    def identity():
        return Transform()

    def apply_point(self, q):
        return self.p + self.T @ np.asarray(q, dtype=np.float64)

    def apply_vector(self, v):
        return self.T @ np.asarray(v, dtype=np.float64)

    def orthonormality_drift(self):
        return float(np.abs(self.T.T @ self.T - np.eye(3)).max())

    def copy(self):
        return Transform(self.p, self.T)

    def __repr__(self):
        return f"Transform(p={self.p.tolist()})"


def rotation_matrix(axis, angle):
    """Rodrigues rotation about a (normalized) axis."""
    a = np.asarray(axis, dtype=np.float64)
    n = np.linalg.norm(a)
    if n == 0.0:
        raise ConfigError("rotation axis must be nonzero")
    a = a / n
    k = np.array([[0.0, -a[2], a[1]],
                  [a[2], 0.0, -a[0]],
                  [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def reorthonormalize(T):
    """Gram-Schmidt on the columns, preserving handedness."""
    q = np.empty_like(T)
    q[:, 0] = T[:, 0] / np.linalg.norm(T[:, 0])
    v = T[:, 1] - (q[:, 0] @ T[:, 1]) * q[:, 0]
    q[:, 1] = v / np.linalg.norm(v)
    q[:, 2] = np.cross(q[:, 0], q[:, 1])
    return q


# ---------------------------------------------------------------------------
# discretizations


class LineSpec:
    """Actuator line: per-point offsets from the start point (start frame),
    optional per-point orientations, and blade-element tables."""

    def __init__(self, offsets, chord, element_length, twist, polar,
                 orientations=None):
        self.offsets = np.asarray(offsets, dtype=np.float64)
        if self.offsets.ndim != 2 or self.offsets.shape[1] != 3:
            raise ConfigError("line offsets must be an (n, 3) array")
        n = self.offsets.shape[0]
        if n < 2:
            raise ConfigError("an actuator line needs at least 2 points")
        self.n_points = n
        self.chord = _per_point(chord, n, "chord")
        self.element_length = _per_point(element_length, n, "element_length")
        self.twist = _per_point(twist, n, "twist")
        self.polar = list(polar) if isinstance(polar, (list, tuple)) \
            else [polar] * n
        if len(self.polar) != n:
            raise ConfigError(
                f"polar ids: expected {n} entries, got {len(self.polar)}")
        if orientations is None:
            self.orientations = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
        else:
            self.orientations = np.asarray(orientations, dtype=np.float64)
            if self.orientations.shape != (n, 3, 3):
                raise ConfigError("line orientations must be (n, 3, 3)")
        # local blade frame: span along the line, chord/normal spanning the
        # section plane.  A point's world frame is its point transform
        # applied to these three unit vectors.
        span = self.offsets[-1] - self.offsets[0]
        ns = np.linalg.norm(span)
        if ns < 1e-12:
            raise ConfigError("line end points coincide")
        self.span_local = span / ns
        ex = np.array([1.0, 0.0, 0.0])
        c = ex - (ex @ self.span_local) * self.span_local
        if np.linalg.norm(c) < 1e-9:
            ey = np.array([0.0, 1.0, 0.0])
            c = ey - (ey @ self.span_local) * self.span_local
        self.chord_local = c / np.linalg.norm(c)
        self.normal_local = np.cross(self.span_local, self.chord_local)


def _per_point(value, n, what):
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ConfigError(f"{what}: expected {n} values, got shape {arr.shape}")
    return arr


class DiskSpec:
    """Actuator disk: center transform relative to the owning component,
    radius, ring/sector sampling, per-annulus thrust coefficients.

    The disk normal is the local +x axis of the center frame; samples sit
    at annulus mid-radii and sector mid-angles in the local y-z plane, and
    their areas tile the disk exactly.
    """

    def __init__(self, radius, rings, sectors, thrust_coefficient,
                 center=None):
        if not radius > 0.0:
            raise ConfigError("disk radius must be positive")
        rings = int(rings)
        sectors = int(sectors)
        if rings < 1 or sectors < 1:
            raise ConfigError("disk sampling counts must be >= 1")
        self.radius = float(radius)
        self.rings = rings
        self.sectors = sectors
        ct = np.asarray(thrust_coefficient, dtype=np.float64)
        if ct.ndim == 0:
            ct = np.full(rings, float(ct))
        if ct.shape != (rings,):
            raise ConfigError(
                f"thrust coefficient: expected {rings} per-ring values")
        self.thrust_coefficient = ct
        self.center = center if center is not None else Transform.identity()

    def sample_offsets(self):
        """Local (n_samples, 3) offsets and matching areas (m^2)."""
        edges = np.linspace(0.0, self.radius, self.rings + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        theta = (np.arange(self.sectors) + 0.5) * (2.0 * np.pi / self.sectors)
        offs = np.zeros((self.rings * self.sectors, 3))
        areas = np.zeros(self.rings * self.sectors)
        k = 0
        for j in range(self.rings):
            ring_area = np.pi * (edges[j + 1] ** 2 - edges[j] ** 2)
            for t in theta:
                offs[k] = (0.0, mids[j] * np.cos(t), mids[j] * np.sin(t))
                areas[k] = ring_area / self.sectors
                k += 1
        return offs, areas


# ---------------------------------------------------------------------------
# components


class Component:
    def __init__(self, name, relative=None, axis=None, rate=0.0,
                 discretization=None, children=None):
        self.name = str(name)
        self.relative = relative if relative is not None else Transform.identity()
        if axis is None:
            self.axis = None
        else:
            a = np.asarray(axis, dtype=np.float64)
            n = np.linalg.norm(a)
            if n == 0.0:
                raise ConfigError(f"component {name}: rotation axis is zero")
            self.axis = a / n
        self.rate = float(rate)
        if self.rate != 0.0 and self.axis is None:
            raise ConfigError(f"component {name}: rotation rate without axis")
        self.discretization = discretization
        self.children = list(children) if children else []
        self.spin = np.eye(3)          # accumulated rotation about the axis
        # world state, refreshed by update_discretization_tree
        self.world = Transform.identity()
        self.world_velocity = np.zeros(3)
        self.world_angular_velocity = np.zeros(3)
        self.world_spin_axis = None    # nearest rotating ancestor's axis
        self.point_transforms = []     # per actuator point
        self.point_velocities = np.zeros((0, 3))

    def advance_rotation(self, dt):
        if self.rate != 0.0 and dt != 0.0:
            self.spin = self.spin @ rotation_matrix(self.axis, self.rate * dt)
            if np.abs(self.spin.T @ self.spin - np.eye(3)).max() > _DRIFT_TOL:
                self.spin = reorthonormalize(self.spin)

    def __repr__(self):
        return f"Component({self.name!r}, children={len(self.children)})"


def update_disk(parent_fix, spec, R):
    """World transform of the disk center: T_c = T_p.T_r.R, p_c = p_p + T_p.p_r."""
    rel = spec.center
    return Transform(parent_fix.p + parent_fix.T @ rel.p,
                     parent_fix.T @ rel.T @ R)


def update_line(parent_fix, spec, R):
    """World transforms of every line point.  The start point composes the
    parent fix with the first point's relative transform; the remaining
    points compose the start frame with their own relative transform and
    the same rotation R once more."""
    t0 = spec.orientations[0]
    start = Transform(parent_fix.p + parent_fix.T @ spec.offsets[0],
                      parent_fix.T @ t0 @ R)
    out = [start]
    for i in range(1, spec.n_points):
        out.append(Transform(start.p + start.T @ spec.offsets[i],
                             start.T @ spec.orientations[i] @ R))
    return out


def _update_node(comp, parent_fix, parent_v, parent_w, dt, parent_axis=None):
    comp.advance_rotation(dt)
    R = comp.spin
    rel = comp.relative
    world = Transform(parent_fix.p + parent_fix.T @ rel.p,
                      parent_fix.T @ rel.T @ R)
    if world.orthonormality_drift() > _DRIFT_TOL:
        world.T = reorthonormalize(world.T)
    v = parent_v + np.cross(parent_w, parent_fix.T @ rel.p)
    w = parent_w.copy()
    spin_axis = parent_axis
    if comp.rate != 0.0:
        spin_axis = parent_fix.T @ rel.T @ comp.axis
        w = w + spin_axis * comp.rate
    comp.world = world
    comp.world_velocity = v
    comp.world_angular_velocity = w
    comp.world_spin_axis = spin_axis

    spec = comp.discretization
    if isinstance(spec, DiskSpec):
        center = update_disk(world, spec, R)
        comp.point_transforms = [center]
        vc = v + np.cross(w, world.T @ spec.center.p)
        comp.point_velocities = vc[None, :].copy()
    elif isinstance(spec, LineSpec):
        pts = update_line(world, spec, R)
        comp.point_transforms = pts
        start = pts[0]
        v_start = v + np.cross(w, world.T @ spec.offsets[0])
        # the start frame spins with the node, plus the node's own R applied
        # once more inside the line update
        w_start = w.copy()
        if comp.rate != 0.0:
            w_start = w_start + (world.T @ spec.orientations[0] @ comp.axis) \
                * comp.rate
        vel = np.empty((spec.n_points, 3))
        vel[0] = v_start
        for i in range(1, spec.n_points):
            vel[i] = v_start + np.cross(w_start, start.T @ spec.offsets[i])
        comp.point_velocities = vel
    else:
        comp.point_transforms = []
        comp.point_velocities = np.zeros((0, 3))

    for child in comp.children:
        _update_node(child, world, v, w, dt, spin_axis)


def update_discretization_tree(root, dt):
    """Advance all rotations by dt and refresh every world transform,
    actuator-point transform, and velocity, in one pre-order pass."""
    _update_node(root, Transform.identity(), np.zeros(3), np.zeros(3), dt)


# ---------------------------------------------------------------------------
# topology


class TurbineTopology:
    """A component tree plus the flat per-step snapshot of actuator points.

    Snapshot rows are (component index, local point id, Transform, velocity)
    in pre-order traversal order; the row index is the point's global id,
    stable across steps.
    """

    def __init__(self, root, name="turbine"):
        self.root = root
        self.name = name
        self.components = _preorder(root)
        update_discretization_tree(root, 0.0)

    def snapshot(self):
        rows = []
        for ci, comp in enumerate(self.components):
            for pi, tr in enumerate(comp.point_transforms):
                rows.append((ci, pi, tr, comp.point_velocities[pi]))
        return rows

    def point_positions(self):
        rows = self.snapshot()
        if not rows:
            return np.zeros((0, 3))
        return np.array([tr.p for _, _, tr, _ in rows])

    def advance(self, dt):
        update_discretization_tree(self.root, dt)


def _preorder(root):
    out = []
    stack = [root]
    seen = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            raise ConfigError(
                f"component {node.name!r} appears twice: the tree has a cycle")
        seen.add(id(node))
        out.append(node)
        stack.extend(reversed(node.children))
    return out


def point_velocities(topology, dt, method="analytic"):
    """Velocities of every snapshot point, m/s.

    analytic: the rates propagated through the frame chain (exact).
    finite_difference: advance a deep copy by dt and difference positions;
    agrees with analytic to O(dt).
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if method == "analytic":
        rows = topology.snapshot()
        if not rows:
            return np.zeros((0, 3))
        return np.array([v for _, _, _, v in rows])
    if method == "finite_difference":
        before = topology.point_positions()
        ghost = copy.deepcopy(topology.root)
        update_discretization_tree(ghost, dt)
        after = []
        for comp in _preorder(ghost):
            after.extend(tr.p for tr in comp.point_transforms)
        after = np.asarray(after).reshape(before.shape)
        return (after - before) / dt
    raise ValueError(f"unknown velocity method {method!r}")


# ---------------------------------------------------------------------------
# declarative definitions


def _parse_orientation(spec, where):
    if spec is None or spec == "identity":
        return np.eye(3)
    if isinstance(spec, dict):
        extra = set(spec) - {"axis", "angle_deg"}
        if extra:
            raise ConfigError(f"{where}: unknown orientation keys {sorted(extra)}")
        return rotation_matrix(spec["axis"],
                               np.deg2rad(float(spec.get("angle_deg", 0.0))))
    mat = np.asarray(spec, dtype=np.float64)
    if mat.shape != (3, 3):
        raise ConfigError(f"{where}: orientation must be a 3x3 matrix, "
                          "'identity', or {axis, angle_deg}")
    return mat


def _parse_line(spec, where, polars):
    known = {"type", "points", "direction", "r_start", "r_end", "offsets",
             "chord", "element_length", "twist_deg", "polar", "stations"}
    extra = set(spec) - known
    if extra:
        raise ConfigError(f"{where}: unknown line keys {sorted(extra)}")
    if "stations" in spec:
        # per-station rows: {r, chord, twist_deg, polar}
        d = np.asarray(spec.get("direction", (0.0, 0.0, 1.0)),
                       dtype=np.float64)
        nd = np.linalg.norm(d)
        if nd == 0.0:
            raise ConfigError(f"{where}: line direction is zero")
        d = d / nd
        r, chord, twist, polar = [], [], [], []
        for j, st in enumerate(spec["stations"]):
            bad = set(st) - {"r", "chord", "twist_deg", "polar"}
            if bad:
                raise ConfigError(
                    f"{where}.stations[{j}]: unknown keys {sorted(bad)}")
            if "r" not in st:
                raise ConfigError(f"{where}.stations[{j}]: needs r")
            r.append(float(st["r"]))
            chord.append(float(st.get("chord", 1.0)))
            twist.append(float(st.get("twist_deg", 0.0)))
            polar.append(st.get("polar"))
        offsets = np.asarray(r)[:, None] * d[None, :]
        spec = dict(spec, chord=chord, twist_deg=twist, polar=polar)
    elif "offsets" in spec:
        offsets = np.asarray(spec["offsets"], dtype=np.float64)
    else:
        n = int(spec["points"])
        if n < 2:
            raise ConfigError(f"{where}: a line needs at least 2 points")
        d = np.asarray(spec.get("direction", (0.0, 0.0, 1.0)), dtype=np.float64)
        nd = np.linalg.norm(d)
        if nd == 0.0:
            raise ConfigError(f"{where}: line direction is zero")
        d = d / nd
        r = np.linspace(float(spec.get("r_start", 0.0)), float(spec["r_end"]), n)
        offsets = r[:, None] * d[None, :]
    n = offsets.shape[0]
    if "element_length" in spec:
        elem = spec["element_length"]
    else:
        # default: each element owns the span between midpoints
        d = np.linalg.norm(np.diff(offsets, axis=0), axis=1)
        elem = np.concatenate([[d[0] / 2], (d[:-1] + d[1:]) / 2, [d[-1] / 2]])
        elem[0] += d[0] / 2
        elem[-1] += d[-1] / 2
    polar = spec.get("polar")
    line = LineSpec(offsets=offsets,
                    chord=spec.get("chord", 1.0),
                    element_length=elem,
                    twist=np.deg2rad(np.asarray(spec.get("twist_deg", 0.0),
                                                dtype=np.float64)),
                    polar=polar)
    if polars is not None:
        for pid in line.polar:
            if pid is not None and pid not in polars:
                raise ConfigError(f"{where}: unknown polar id {pid!r}")
    return line


def _parse_disk(spec, where):
    known = {"type", "radius", "rings", "sectors", "thrust_coefficient",
             "position", "orientation"}
    extra = set(spec) - known
    if extra:
        raise ConfigError(f"{where}: unknown disk keys {sorted(extra)}")
    center = Transform(np.asarray(spec.get("position", (0.0, 0.0, 0.0)),
                                  dtype=np.float64),
                       _parse_orientation(spec.get("orientation"), where))
    return DiskSpec(radius=float(spec["radius"]),
                    rings=int(spec.get("rings", 10)),
                    sectors=int(spec.get("sectors", 12)),
                    thrust_coefficient=spec["thrust_coefficient"],
                    center=center)


def _parse_component(spec, where, polars):
    known = {"name", "position", "orientation", "rotation", "discretization",
             "children"}
    extra = set(spec) - known
    if extra:
        raise ConfigError(f"{where}: unknown component keys {sorted(extra)}")
    name = spec.get("name")
    if not name:
        raise ConfigError(f"{where}: every component needs a name")
    rel = Transform(np.asarray(spec.get("position", (0.0, 0.0, 0.0)),
                               dtype=np.float64),
                    _parse_orientation(spec.get("orientation"),
                                       f"{where}.{name}"))
    axis, rate = None, 0.0
    rot = spec.get("rotation")
    if rot is not None:
        extra = set(rot) - {"axis", "rate_rad_per_s", "rate_rpm"}
        if extra:
            raise ConfigError(
                f"{where}.{name}: unknown rotation keys {sorted(extra)}")
        axis = rot.get("axis")
        if axis is None:
            raise ConfigError(f"{where}.{name}: rotation needs an axis")
        if "rate_rad_per_s" in rot and "rate_rpm" in rot:
            raise ConfigError(
                f"{where}.{name}: give rate_rad_per_s or rate_rpm, not both")
        if "rate_rpm" in rot:
            rate = float(rot["rate_rpm"]) * 2.0 * np.pi / 60.0
        else:
            rate = float(rot.get("rate_rad_per_s", 0.0))
    disc = None
    dspec = spec.get("discretization")
    if dspec is not None and dspec != "none":
        kind = dspec.get("type")
        if kind == "line":
            disc = _parse_line(dspec, f"{where}.{name}", polars)
        elif kind == "disk":
            disc = _parse_disk(dspec, f"{where}.{name}")
        else:
            raise ConfigError(
                f"{where}.{name}: discretization type must be line or disk")
    children = [_parse_component(c, f"{where}.{name}", polars)
                for c in spec.get("children", [])]
    return Component(name, relative=rel, axis=axis, rate=rate,
                     discretization=disc, children=children)


def _nest_flat_components(entries, where):
    """Convert a flat component list with parent references into the nested
    children form.  Exactly one entry has no parent (the root); parent
    loops and unknown parents are configuration errors."""
    specs = {}
    order = []
    for j, entry in enumerate(entries):
        if not isinstance(entry, dict) or not entry.get("name"):
            raise ConfigError(f"{where}.components[{j}]: needs a name")
        nm = entry["name"]
        if nm in specs:
            raise ConfigError(f"{where}: duplicate component name {nm!r}")
        if "children" in entry:
            raise ConfigError(
                f"{where}.components[{j}]: flat lists use parent, "
                "not children")
        specs[nm] = dict(entry)
        order.append(nm)
    roots = [nm for nm in order if specs[nm].get("parent") is None]
    if len(roots) != 1:
        raise ConfigError(
            f"{where}: expected exactly one component without a parent, "
            f"found {roots}")
    for nm in order:
        parent = specs[nm].pop("parent", None)
        if parent is None:
            continue
        if parent not in specs:
            raise ConfigError(f"{where}: component {nm!r} names unknown "
                              f"parent {parent!r}")
        # walk up: a path that returns to nm is a parent loop
        seen, cur = {nm}, parent
        while cur is not None:
            if cur in seen:
                raise ConfigError(
                    f"{where}: parent chain of {nm!r} is a cycle")
            seen.add(cur)
            cur = specs[cur].get("_parent")
        specs[nm]["_parent"] = parent
        specs[parent].setdefault("children", []).append(specs[nm])
    for nm in order:
        specs[nm].pop("_parent", None)
    return specs[roots[0]]


def build_topology(definition, polars=None):
    """Build a TurbineTopology from a declarative definition (parsed YAML:
    nested dicts, or a flat component list with parent references), or wrap
    an existing Component tree."""
    if isinstance(definition, Component):
        return TurbineTopology(definition)
    if not isinstance(definition, dict):
        raise ConfigError("turbine definition must be a mapping")
    name = definition.get("name", "turbine")
    if "components" in definition:
        extra = set(definition) - {"name", "components"}
        if extra:
            raise ConfigError(f"turbine {name}: unknown keys {sorted(extra)}")
        root_spec = _nest_flat_components(definition["components"], name)
    else:
        root_spec = definition.get("root", definition)
        if root_spec is definition and "name" not in definition:
            raise ConfigError("turbine definition needs a root component")
    root = _parse_component(root_spec, name, polars)
    return TurbineTopology(root, name=name)
