import numpy as np
import pytest
from numpy.random import default_rng

from filstokes.curves import (
    Pose,
    curve_from_spec,
    cutoff_centerline,
    min_distance,
    place,
    recenter,
    resample_arclength,
    rigid_velocity,
)
from filstokes.errors import DegenerateInputError, InvalidPoseError
from filstokes.so3 import rotation_from_axis_angle


def circle_fn(radius=1.0, center=(0.0, 0.0, 0.0)):
    c = np.asarray(center, dtype=float)

    def fn(t):
        th = 2 * np.pi * np.asarray(t)
        return c + radius * np.stack(
            [np.cos(th), np.sin(th), np.zeros_like(th)], axis=-1
        )

    return fn


def trefoil_fn(t):
    th = 2 * np.pi * np.asarray(t)
    return np.stack(
        [np.sin(th) + 2 * np.sin(2 * th),
         np.cos(th) - 2 * np.cos(2 * th),
         -np.sin(3 * th)],
        axis=-1,
    )


# -- resample -----------------------------------------------------------------

def test_circle_length():
    c = resample_arclength(circle_fn(), 64, closed=True)
    assert abs(c.length - 2 * np.pi) <= 1e-4


def test_straight_segment():
    samples = np.linspace(0, 1, 33)[:, None] * np.array([1.0, 0.0, 0.0])
    c = resample_arclength(samples, 16, closed=False)
    assert abs(c.length - 1.0) <= 1e-10
    assert np.max(np.abs(c.tangents - np.array([1.0, 0.0, 0.0]))) <= 1e-10
    assert c.is_straight()


def test_trefoil_length_self_convergence():
    # oracle: the same resampler at 64x the node count
    oracle = resample_arclength(trefoil_fn, 16384, closed=True)
    c = resample_arclength(trefoil_fn, 256, closed=True)
    assert abs(c.length - oracle.length) <= 1e-3 * oracle.length
    assert not c.is_straight()


def test_curve_invariants():
    for spec in ({"preset": "circle"}, {"preset": "trefoil"},
                 {"preset": "helix_arc"}, {"preset": "ellipse"}):
        c = curve_from_spec(spec, default_nodes=128)
        c.validate()
        assert np.max(np.abs(np.linalg.norm(c.tangents, axis=1) - 1)) <= 1e-12
        assert abs(c.arc_weights.sum() - c.length) <= 1e-10 * c.length


def test_resample_errors():
    with pytest.raises(DegenerateInputError):
        resample_arclength(np.zeros((2, 3)), 16)
    bad = np.array([[0, 0, 0], [1, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float)
    with pytest.raises(DegenerateInputError):
        resample_arclength(bad, 16)
    with pytest.raises(DegenerateInputError):
        resample_arclength(circle_fn(), 4, closed=True)


# -- recenter -----------------------------------------------------------------

def test_recenter_circle():
    c = resample_arclength(circle_fn(center=(1.0, 2.0, 3.0)), 64, closed=True)
    centered, offset = recenter(c)
    assert np.allclose(offset, [1.0, 2.0, 3.0], atol=1e-8)
    bary = centered.arc_weights @ centered.nodes / centered.length
    assert np.max(np.abs(bary)) <= 1e-10


def test_recenter_idempotent():
    c = resample_arclength(trefoil_fn, 128, closed=True)
    c1, _ = recenter(c)
    c2, offset = recenter(c1)
    assert np.max(np.abs(offset)) <= 1e-12
    assert np.allclose(c1.nodes, c2.nodes, atol=1e-12)


def test_recenter_open_arc():
    fn = lambda t: np.stack(
        [np.cos(2.0 * t), np.sin(2.0 * t), 0.3 * t], axis=-1
    )
    c = resample_arclength(fn, 64, closed=False)
    centered, _ = recenter(c)
    bary = centered.arc_weights @ centered.nodes / centered.length
    assert np.max(np.abs(bary)) <= 1e-10


# -- place --------------------------------------------------------------------

def test_place_identity_and_translation():
    c, _ = recenter(resample_arclength(circle_fn(), 64, closed=True))
    same = place(c, Pose.identity())
    assert np.allclose(same.nodes, c.nodes, atol=0)
    shifted = place(c, Pose(np.array([0.0, 0.0, 5.0]), np.eye(3)))
    assert np.allclose(shifted.nodes, c.nodes + [0, 0, 5], atol=0)
    assert np.allclose(shifted.tangents, c.tangents, atol=0)
    assert shifted.length == c.length


def test_place_matches_rotated_resample():
    # circle in the xz-plane, rotated by pi/2 about e3
    def xz_circle(t):
        th = 2 * np.pi * np.asarray(t)
        return np.stack([np.cos(th), np.zeros_like(th), np.sin(th)], axis=-1)

    Q = rotation_from_axis_angle([0, 0, 1], np.pi / 2)
    c = resample_arclength(xz_circle, 128, closed=True)
    placed = place(c, Pose(np.zeros(3), Q))
    rotated = resample_arclength(lambda t: xz_circle(t) @ Q.T, 128, closed=True)
    assert np.max(np.abs(placed.nodes - rotated.nodes)) <= 1e-12


def test_place_rejects_bad_rotation():
    c = resample_arclength(circle_fn(), 64, closed=True)
    with pytest.raises(InvalidPoseError):
        place(c, Pose(np.zeros(3), np.diag([1.0, 1.0, 2.0])))


def test_place_resample_commutes():
    rng = default_rng(8)
    Q = rotation_from_axis_angle(rng.standard_normal(3), 0.7)
    pose = Pose(rng.standard_normal(3), Q)
    c = resample_arclength(trefoil_fn, 128, closed=True)
    a = place(c, pose)
    b = resample_arclength(lambda t: trefoil_fn(t) @ Q.T + pose.translation,
                           128, closed=True)
    assert np.max(np.abs(a.nodes - b.nodes)) <= 1e-8


# -- min_distance -------------------------------------------------------------

def test_min_distance_coaxial():
    a = resample_arclength(circle_fn(), 128, closed=True)
    b = resample_arclength(circle_fn(center=(0, 0, 2.0)), 128, closed=True)
    assert abs(min_distance(a, b) - 2.0) <= 1e-6


def test_min_distance_identical():
    a = resample_arclength(circle_fn(), 64, closed=True)
    assert min_distance(a, a) == 0.0


def test_min_distance_shifted_circles():
    a = resample_arclength(circle_fn(), 256, closed=True)
    b = resample_arclength(circle_fn(center=(3.0, 0, 0)), 256, closed=True)
    d = min_distance(a, b)
    assert abs(d - 1.0) <= 1e-4
    # dense point-sampling oracle
    th = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
    pa = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=-1)
    pb = pa + [3.0, 0, 0]
    oracle = np.min(np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=-1))
    assert abs(d - oracle) <= 1e-4


def test_min_distance_symmetry_and_translation():
    a = resample_arclength(circle_fn(), 96, closed=True)
    b = resample_arclength(circle_fn(center=(0, 0, 1.5)), 96, closed=True)
    assert min_distance(a, b) == min_distance(b, a)
    d0 = min_distance(a, b)
    for delta in (0.3, 1.1):
        moved = place(b, Pose(np.array([0, 0, delta]), np.eye(3)))
        assert abs(min_distance(a, moved) - (d0 + delta)) <= 1e-9


# -- cutoff -------------------------------------------------------------------

def test_cutoff_closed_unchanged():
    c = resample_arclength(circle_fn(), 64, closed=True)
    assert cutoff_centerline(c, 0.05) is c


def test_cutoff_segment():
    samples = np.linspace(0, 1, 65)[:, None] * np.array([1.0, 0.0, 0.0])
    c = resample_arclength(samples, 32, closed=False)
    cut = cutoff_centerline(c, 0.1)
    assert abs(cut.length - 0.8) <= 1e-8


def test_cutoff_open_arc_length():
    fn = lambda t: np.stack(
        [np.cos(1.5 * t), np.sin(1.5 * t), 0.2 * t], axis=-1
    )
    c = resample_arclength(fn, 256, closed=False)
    eps = 0.01 * c.length
    cut = cutoff_centerline(c, eps)
    assert abs(cut.length - 0.98 * c.length) <= 1e-6 * c.length


def test_cutoff_zero_is_identity():
    c = resample_arclength(circle_fn(), 64, closed=True)
    assert cutoff_centerline(c, 0.0) is c
    samples = np.linspace(0, 1, 33)[:, None] * np.array([1.0, 0.0, 0.0])
    o = resample_arclength(samples, 16, closed=False)
    assert cutoff_centerline(o, 0.0) is o


def test_cutoff_rejects_large_eps():
    samples = np.linspace(0, 1, 33)[:, None] * np.array([1.0, 0.0, 0.0])
    c = resample_arclength(samples, 16, closed=False)
    with pytest.raises(DegenerateInputError):
        cutoff_centerline(c, 0.5)


# -- rigid velocities ----------------------------------------------------------

def test_rigid_velocity_values():
    assert np.allclose(rigid_velocity(1, np.zeros(3), [9.0, 9.0, 9.0]), [1, 0, 0])
    assert np.allclose(rigid_velocity(6, np.zeros(3), [1.0, 0, 0]), [0, 1, 0])
    assert np.allclose(rigid_velocity(4, [0, 0, 1.0], [0, 2.0, 1.0]), [0, 0, 2.0])


def test_rigid_velocity_bad_alpha():
    with pytest.raises(ValueError):
        rigid_velocity(7, np.zeros(3), np.zeros(3))


# -- specs ---------------------------------------------------------------------

def test_circular_cross_section_invariants():
    from filstokes.curves import circular_cross_section

    c = resample_arclength(trefoil_fn, 128, closed=True)
    xsec = circular_cross_section(c, radius=0.5, thickness=0.02)
    for s in (0.0, 0.3 * c.length, 0.9 * c.length):
        R = xsec.frame(s)
        assert np.max(np.abs(R.T @ R - np.eye(3))) <= 1e-12
        assert abs(np.linalg.det(R) - 1.0) <= 1e-12
        assert np.allclose(xsec.shape(s, np.zeros(2)), 0.0)
        assert abs(xsec.area(s) - np.pi * 0.25) <= 1e-12
    # third frame column is the tangent at the nearest node
    R0 = xsec.frame(0.0)
    assert np.max(np.abs(R0[:, 2] - c.tangents[0])) <= 1e-12


def test_curve_from_spec_presets_and_samples():
    c = curve_from_spec({"preset": "circle", "params": {"radius": 2.0}, "nodes": 64})
    assert abs(c.length - 4 * np.pi) <= 1e-6
    th = np.linspace(0, 2 * np.pi, 80, endpoint=False)
    samples = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=-1)
    c2 = curve_from_spec({"samples": samples.tolist(), "closed": True, "nodes": 64})
    assert abs(c2.length - 2 * np.pi) <= 1e-3
    with pytest.raises(DegenerateInputError):
        curve_from_spec({"preset": "moebius"})
    with pytest.raises(DegenerateInputError):
        curve_from_spec({})


def test_curve_from_file(tmp_path):
    import json

    from filstokes.curves import load_curve

    path = tmp_path / "curve.json"
    path.write_text(json.dumps({"preset": "circle", "params": {"radius": 2.0},
                                "nodes": 48}))
    c = load_curve(path)
    assert abs(c.length - 4 * np.pi) <= 1e-6
    # a config-style reference may override the node count
    c2 = curve_from_spec({"file": str(path), "nodes": 96})
    assert c2.n == 96
