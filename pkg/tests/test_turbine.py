"""Turbine tree kinematics: transforms, line/disk updates, velocities."""

import numpy as np
import pytest

from lbwind.errors import ConfigError
from lbwind.turbine import (Component, DiskSpec, LineSpec, Transform,
                            TurbineTopology, build_topology, point_velocities,
                            rotation_matrix, update_discretization_tree,
                            update_disk, update_line)


def _line_along_z(n=5, r_end=4.0, polar=None):
    r = np.linspace(0.0, r_end, n)
    return LineSpec(offsets=np.c_[np.zeros(n), np.zeros(n), r],
                    chord=1.0, element_length=r_end / n, twist=0.0,
                    polar=polar)


def _two_blade_rotor(rate=3.0, n=5, r_end=4.0):
    """Tower -> nacelle -> hub (spinning about +x) -> two opposite blades."""
    blades = [
        Component("blade1", relative=Transform((0.5, 0.0, 0.0)),
                  discretization=_line_along_z(n, r_end)),
        Component("blade2",
                  relative=Transform((0.5, 0.0, 0.0),
                                     rotation_matrix((1, 0, 0), np.pi)),
                  discretization=_line_along_z(n, r_end)),
    ]
    hub = Component("hub", relative=Transform((0.0, 0.0, 0.0)),
                    axis=(1.0, 0.0, 0.0), rate=rate, children=blades)
    nacelle = Component("nacelle", relative=Transform((0.0, 0.0, 10.0)),
                        children=[hub])
    tower = Component("tower", children=[nacelle])
    return TurbineTopology(tower)


# ---------------------------------------------------------------------------
# construction


def test_single_root_identity():
    topo = build_topology({"name": "t", "root": {"name": "base"}})
    assert np.array_equal(topo.root.world.p, np.zeros(3))
    assert np.array_equal(topo.root.world.T, np.eye(3))


def test_child_offset_propagates():
    topo = build_topology({
        "root": {"name": "base",
                 "children": [{"name": "top", "position": [0, 0, 10]}]}})
    assert np.allclose(topo.components[1].world.p, (0, 0, 10))


def test_rotated_parent_rotates_child_offset():
    # parent yawed 90 deg about z carries a (1,0,0) child to (0,1,0)
    topo = build_topology({
        "root": {"name": "base",
                 "orientation": {"axis": [0, 0, 1], "angle_deg": 90},
                 "children": [{"name": "arm", "position": [1, 0, 0]}]}})
    assert np.allclose(topo.components[1].world.p, (0, 1, 0), atol=1e-12)


def test_cycle_detected():
    a = Component("a")
    b = Component("b", children=[a])
    a.children = [b]
    with pytest.raises(ConfigError):
        build_topology(a)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        build_topology({"root": {"name": "x", "colour": "red"}})
    with pytest.raises(ConfigError):
        build_topology({"root": {"name": "x", "rotation": {"axis": [1, 0, 0],
                                                           "speed": 1}}})


def test_unknown_polar_id_rejected():
    defn = {"root": {
        "name": "blade",
        "discretization": {"type": "line", "points": 3, "r_end": 2.0,
                           "polar": "naca9999"}}}
    with pytest.raises(ConfigError):
        build_topology(defn, polars={"naca0012": object()})
    build_topology(defn, polars={"naca9999": object()})  # known id passes


# ---------------------------------------------------------------------------
# update_disk / update_line


def test_update_disk_identity():
    spec = DiskSpec(radius=1.0, rings=1, sectors=1, thrust_coefficient=0.5)
    out = update_disk(Transform.identity(), spec, np.eye(3))
    assert np.array_equal(out.p, np.zeros(3))
    assert np.array_equal(out.T, np.eye(3))


def test_update_disk_rotated_parent():
    spec = DiskSpec(radius=1.0, rings=1, sectors=1, thrust_coefficient=0.5,
                    center=Transform((1.0, 0.0, 0.0)))
    parent = Transform((5.0, 0.0, 0.0), rotation_matrix((0, 0, 1), np.pi / 2))
    out = update_disk(parent, spec, np.eye(3))
    assert np.allclose(out.p, (5.0, 1.0, 0.0), atol=1e-12)


def test_update_line_straight():
    spec = _line_along_z(n=4, r_end=3.0)
    pts = update_line(Transform((1.0, 2.0, 3.0)), spec, np.eye(3))
    for i, tr in enumerate(pts):
        assert np.allclose(tr.p, (1.0, 2.0, 3.0 + i * 1.0), atol=1e-12)


def test_update_line_rigid_rotation():
    spec = _line_along_z(n=5, r_end=4.0)
    before = update_line(Transform.identity(), spec, np.eye(3))
    rot = rotation_matrix((1, 0, 0), np.pi / 2)
    after = update_line(Transform(T=rot), spec, np.eye(3))
    for b, a in zip(before, after):
        assert np.allclose(rot @ b.p, a.p, atol=1e-12)
    # consecutive distances are invariant under the rigid update
    d0 = [np.linalg.norm(b.p - a.p) for a, b in zip(before, before[1:])]
    d1 = [np.linalg.norm(b.p - a.p) for a, b in zip(after, after[1:])]
    assert np.allclose(d0, d1, atol=1e-12)


def test_line_rejects_bad_tables():
    with pytest.raises(ConfigError):
        LineSpec(offsets=np.zeros((4, 3)), chord=np.ones(3),
                 element_length=1.0, twist=0.0, polar=None)
    with pytest.raises(ConfigError):
        LineSpec(offsets=np.zeros((1, 3)), chord=1.0, element_length=1.0,
                 twist=0.0, polar=None)


# ---------------------------------------------------------------------------
# tree updates


def test_static_tree_snapshot_unchanged():
    topo = _two_blade_rotor(rate=0.0)
    p0 = topo.point_positions()
    for _ in range(10):
        topo.advance(0.1)
    assert np.array_equal(topo.point_positions(), p0)


def test_half_turn_reflects_tip_through_axis():
    rate = 3.0
    topo = _two_blade_rotor(rate=rate)
    hub = topo.components[2]
    center = hub.world.p.copy()
    tip0 = topo.components[3].point_transforms[-1].p - center
    n_steps = 100
    dt = np.pi / rate / n_steps
    for _ in range(n_steps):
        topo.advance(dt)
    tip1 = topo.components[3].point_transforms[-1].p - center
    # rotation about +x by pi: x stays, y and z flip
    assert np.allclose(tip1, (tip0[0], -tip0[1], -tip0[2]), atol=1e-10)


def test_opposite_blades_stay_opposite():
    topo = _two_blade_rotor(rate=2.2)
    rng = np.random.default_rng(3)
    hub = topo.components[2]
    for _ in range(25):
        topo.advance(float(rng.uniform(0.001, 0.3)))
        c = hub.world.p
        t1 = topo.components[3].point_transforms[-1].p - c
        t2 = topo.components[4].point_transforms[-1].p - c
        # same offset along the rotation axis, opposite in the rotor plane
        assert abs(t1[0] - t2[0]) < 1e-10
        assert np.allclose(t1[1:], -t2[1:], atol=1e-10)


def test_rigid_invariance_of_pairwise_distances():
    topo = _two_blade_rotor(rate=1.7)
    pts0 = np.array([tr.p for tr in topo.components[3].point_transforms])
    d0 = np.linalg.norm(pts0[None, :, :] - pts0[:, None, :], axis=-1)
    for _ in range(50):
        topo.advance(0.05)
    pts1 = np.array([tr.p for tr in topo.components[3].point_transforms])
    d1 = np.linalg.norm(pts1[None, :, :] - pts1[:, None, :], axis=-1)
    assert np.allclose(d0, d1, atol=1e-12)


def test_tree_update_equals_flat_composition():
    rate = 1.3
    topo = _two_blade_rotor(rate=rate)
    n_steps, dt = 40, 0.02
    for _ in range(n_steps):
        topo.advance(dt)
    # compose each tip transform directly from the definition
    spin = rotation_matrix((1, 0, 0), rate * n_steps * dt)
    for blade_i, azimuth in ((3, 0.0), (4, np.pi)):
        t_hub = spin  # tower and nacelle are identity rotations
        p_hub = np.array([0.0, 0.0, 10.0])
        t_blade = t_hub @ rotation_matrix((1, 0, 0), azimuth)
        p_blade = p_hub + t_hub @ np.array([0.5, 0.0, 0.0])
        expected_tip = p_blade + t_blade @ np.array([0.0, 0.0, 4.0])
        got = topo.components[blade_i].point_transforms[-1].p
        assert np.allclose(got, expected_tip, atol=1e-12)


def test_orthonormality_after_many_updates():
    topo = _two_blade_rotor(rate=5.0)
    hub = topo.components[2]
    for _ in range(100_000):
        hub.advance_rotation(1e-3)
    drift = np.abs(hub.spin.T @ hub.spin - np.eye(3)).max()
    assert drift < 1e-12 * 1.5
    assert abs(np.linalg.det(hub.spin) - 1.0) < 1e-10
    update_discretization_tree(topo.root, 0.0)
    for comp in topo.components:
        assert comp.world.orthonormality_drift() < 1e-10


# ---------------------------------------------------------------------------
# velocities


def test_static_velocities_zero():
    topo = _two_blade_rotor(rate=0.0)
    v = point_velocities(topo, 0.01)
    assert np.array_equal(v, np.zeros_like(v))


def test_tip_speed_is_omega_r():
    topo = _two_blade_rotor(rate=3.0, r_end=2.0)
    topo.advance(0.01)
    v = point_velocities(topo, 0.01)
    # last point of blade1 sits at radius 2 from the hub axis
    tip_v = v[4]
    assert abs(np.linalg.norm(tip_v) - 6.0) < 1e-10
    # velocity is tangential: no component along the hub axis
    assert abs(tip_v[0]) < 1e-12


def test_analytic_matches_finite_difference():
    rate = 2.0
    topo = _two_blade_rotor(rate=rate)
    topo.advance(0.13)
    dt = 0.01 / rate  # rotation per step = 0.01 rad
    va = point_velocities(topo, dt, method="analytic")
    vf = point_velocities(topo, dt, method="finite_difference")
    speeds = np.linalg.norm(va, axis=1)
    err = np.linalg.norm(va - vf, axis=1)
    mask = speeds > 1e-12
    assert np.all(err[mask] / speeds[mask] < 0.01)


def test_point_velocities_rejects_bad_dt():
    topo = _two_blade_rotor()
    with pytest.raises(ValueError):
        point_velocities(topo, 0.0)
    with pytest.raises(ValueError):
        point_velocities(topo, -0.1)


# ---------------------------------------------------------------------------
# disks


def test_disk_samples_tile_the_disk():
    spec = DiskSpec(radius=3.0, rings=4, sectors=8, thrust_coefficient=0.7)
    offs, areas = spec.sample_offsets()
    assert offs.shape == (32, 3)
    assert np.allclose(areas.sum(), np.pi * 9.0, rtol=1e-12)
    assert np.all(offs[:, 0] == 0.0)  # samples lie in the local y-z plane
    radii = np.linalg.norm(offs[:, 1:], axis=1)
    assert radii.max() < 3.0


def test_disk_validation():
    with pytest.raises(ConfigError):
        DiskSpec(radius=-1.0, rings=2, sectors=2, thrust_coefficient=0.5)
    with pytest.raises(ConfigError):
        DiskSpec(radius=1.0, rings=0, sectors=2, thrust_coefficient=0.5)
    with pytest.raises(ConfigError):
        DiskSpec(radius=1.0, rings=3, sectors=2,
                 thrust_coefficient=[0.5, 0.6])  # wrong per-ring length


# ---------------------------------------------------------------------------
# example topologies


def _hawt_defn():
    blade = lambda az: {
        "name": f"blade{az}",
        "orientation": {"axis": [1, 0, 0], "angle_deg": az},
        "discretization": {"type": "line", "points": 5, "r_end": 4.0,
                           "direction": [0, 0, 1]}}
    return {"name": "hawt", "root": {
        "name": "tower", "children": [{
            "name": "nacelle", "position": [0, 0, 10], "children": [{
                "name": "hub", "position": [1, 0, 0],
                "rotation": {"axis": [1, 0, 0], "rate_rpm": 12},
                "children": [blade(0), blade(120), blade(240)]}]}]}}


def _vawt_defn():
    blade = lambda az, name: {
        "name": name,
        "orientation": {"axis": [0, 0, 1], "angle_deg": az},
        "position": [0, 0, 0],
        "children": [],
        "discretization": {"type": "line", "points": 5, "r_start": 2.0,
                           "r_end": 2.0 + 4.0, "direction": [1, 0, 0]}}
    return {"name": "vawt", "root": {
        "name": "tower", "children": [{
            "name": "hub", "position": [0, 0, 6],
            "rotation": {"axis": [0, 0, 1], "rate_rpm": 20},
            "children": [blade(0, "b1"), blade(120, "b2"),
                         blade(240, "b3")]}]}}


def test_hawt_vawt_trees_isomorphic_modulo_nacelle():
    hawt = build_topology(_hawt_defn())
    vawt = build_topology(_vawt_defn())

    def shape(comp):
        kind = type(comp.discretization).__name__
        return (kind, sorted(shape(c) for c in comp.children))

    h = shape(hawt.root)
    v = shape(vawt.root)
    # dropping the single-child nacelle level from the HAWT gives the VAWT
    assert h != v
    hawt_sans_nacelle = ("NoneType", h[1][0][1])
    assert hawt_sans_nacelle == v


def test_snapshot_ids_stable_across_steps():
    topo = build_topology(_hawt_defn())
    rows0 = [(ci, pi) for ci, pi, _, _ in topo.snapshot()]
    assert len(rows0) == 15  # 3 blades x 5 points
    topo.advance(0.05)
    rows1 = [(ci, pi) for ci, pi, _, _ in topo.snapshot()]
    assert rows0 == rows1
