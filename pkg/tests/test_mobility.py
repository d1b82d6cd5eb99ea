import numpy as np
import pytest
from numpy.random import default_rng

from filstokes.curves import (
    Pose,
    circular_cross_section,
    curve_from_spec,
    place,
    recenter,
    resample_arclength,
)
from filstokes.errors import (
    IllConditionedError,
    PreconditionError,
    StraightCurveError,
)
from filstokes.flows import BackgroundFlow, constant_flow, shear_flow
from filstokes.mobility import (
    InertiaSpec,
    archimedes_load,
    conjugate_resistance,
    faxen_load,
    inertia_from_filament,
    line_pairing,
    resistance_matrix,
    solve_quasistatic,
)
from filstokes.so3 import random_rotation, rotation_from_axis_angle

PI = np.pi


def unit_circle(n=256):
    c = curve_from_spec({"preset": "circle", "nodes": n})
    return recenter(c)[0]


# -- independent brute-force oracles (analytic circle parametrization) --------

def brute_circle_quantities(m=8192):
    th = np.linspace(0, 2 * PI, m, endpoint=False)
    x = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=-1)
    tau = np.stack([-np.sin(th), np.cos(th), np.zeros_like(th)], axis=-1)
    w = 2 * PI / m
    fields = np.zeros((6, m, 3))
    for a in range(3):
        fields[a, :, a] = 1.0
        e = np.zeros(3)
        e[a] = 1.0
        fields[3 + a] = np.cross(e, x)

    def pair(u, v):
        tu = np.einsum("md,md->m", tau, u)
        tv = np.einsum("md,md->m", tau, v)
        uv = np.einsum("md,md->m", u, v)
        return 0.5 * 8 * PI * w * np.sum(uv - 0.5 * tu * tv)

    K = np.array([[pair(fields[a], fields[b]) for b in range(6)] for a in range(6)])
    return th, x, tau, w, fields, pair, K


def test_circle_resistance_matches_brute_oracle_and_closed_form():
    *_, K_brute = brute_circle_quantities()
    expected = np.diag([6 * PI**2, 6 * PI**2, 8 * PI**2,
                        4 * PI**2, 4 * PI**2, 4 * PI**2])
    assert np.max(np.abs(K_brute - expected)) <= 1e-9 * np.max(expected)

    c = unit_circle(512)
    K = resistance_matrix(c, np.zeros(3)).entries
    assert np.max(np.abs(K - expected)) <= 1e-8 * np.max(np.abs(expected))


def test_line_pairing_circle_constant_field():
    c = unit_circle(128)
    e3 = np.broadcast_to(np.array([0.0, 0.0, 1.0]), (c.n, 3))
    val = line_pairing(c, e3, e3)
    assert abs(val - 8 * PI**2) <= 1e-8 * 8 * PI**2


def test_line_pairing_zero_and_symmetry():
    c = unit_circle(96)
    rng = default_rng(20)
    v = rng.standard_normal((c.n, 3))
    w = rng.standard_normal((c.n, 3))
    assert line_pairing(c, np.zeros_like(v), w) == 0.0
    a, b = line_pairing(c, v, w), line_pairing(c, w, v)
    assert abs(a - b) <= 1e-12 * max(abs(a), 1.0)


def test_line_pairing_shape_mismatch():
    c = unit_circle(96)
    with pytest.raises(PreconditionError):
        line_pairing(c, np.zeros((3, 3)), np.zeros((c.n, 3)))


def test_symmetric_curve_has_zero_coupling():
    c = unit_circle(256)
    K = resistance_matrix(c, np.zeros(3))
    assert np.max(np.abs(K.coupling_block)) <= 1e-10 * np.max(np.abs(K.entries))


def test_conjugate_identity_and_eigenvalues():
    c = unit_circle(128)
    K = resistance_matrix(c, np.zeros(3))
    same = conjugate_resistance(K, np.eye(3))
    assert np.allclose(same.entries, K.entries, atol=0)
    rng = default_rng(21)
    Q = random_rotation(rng)
    rotated = conjugate_resistance(K, Q)
    assert np.allclose(
        np.sort(np.linalg.eigvalsh(rotated.entries)),
        np.sort(np.linalg.eigvalsh(K.entries)),
        rtol=1e-10,
    )


def test_conjugate_quarter_turn_permutes_circle_blocks():
    # the 8 pi^2 translation entry follows the circle normal
    c = unit_circle(256)
    K = resistance_matrix(c, np.zeros(3))
    Q = rotation_from_axis_angle([1.0, 0, 0], PI / 2)
    rotated = conjugate_resistance(K, Q)
    expected_tt = np.diag([6 * PI**2, 8 * PI**2, 6 * PI**2])
    assert np.max(np.abs(rotated.translation_block - expected_tt)) <= 1e-8 * PI**2
    # oracle: re-assemble on the placed curve
    world = place(c, Pose(np.zeros(3), Q))
    K_world = resistance_matrix(world, np.zeros(3))
    assert np.max(np.abs(rotated.entries - K_world.entries)) \
        <= 1e-10 * np.max(np.abs(K_world.entries))


def test_sylvester_conjugation_random_poses():
    c = unit_circle(128)
    K_body = resistance_matrix(c, np.zeros(3))
    rng = default_rng(22)
    for _ in range(10):
        Q = random_rotation(rng)
        h = rng.standard_normal(3)
        world = place(c, Pose(h, Q))
        K_world = resistance_matrix(world, h)
        K_conj = conjugate_resistance(K_body, Q)
        scale = np.max(np.abs(K_world.entries))
        assert np.max(np.abs(K_world.entries - K_conj.entries)) <= 1e-10 * scale


def test_faxen_circle_constant_flow():
    c = unit_circle(256)
    load = faxen_load(c, np.zeros(3), constant_flow([0.0, 0.0, 1.0]))
    assert np.max(np.abs(load.force - [0, 0, 8 * PI**2])) <= 1e-8 * PI**2
    assert np.max(np.abs(load.torque)) <= 1e-10 * PI**2
    # brute oracle
    th, x, tau, w, fields, pair, _ = brute_circle_quantities()
    u = np.broadcast_to(np.array([0.0, 0.0, 1.0]), x.shape)
    brute = np.array([pair(fields[a], u) for a in range(6)])
    assert np.max(np.abs(load.stacked - brute)) <= 1e-6


def test_faxen_zero_flow_and_linearity():
    c = unit_circle(96)
    z = faxen_load(c, np.zeros(3), constant_flow([0.0, 0.0, 0.0]))
    assert np.max(np.abs(z.stacked)) == 0.0
    fa, fb = constant_flow([1.0, 0.5, 0.0]), shear_flow(0.7)
    f1 = faxen_load(c, np.zeros(3), fa)
    f2 = faxen_load(c, np.zeros(3), fb)
    both = BackgroundFlow(
        velocity=lambda t, x: fa.velocity(t, x) + fb.velocity(t, x),
        gradient=lambda t, x: fa.gradient(t, x) + fb.gradient(t, x),
        laplacian=lambda t, x: fa.laplacian(t, x) + fb.laplacian(t, x),
        pressure_gradient=lambda t, x: fa.pressure_gradient(t, x)
        + fb.pressure_gradient(t, x),
    )
    scale = max(np.max(np.abs(f1.stacked)), np.max(np.abs(f2.stacked)))
    combined = faxen_load(c, np.zeros(3), both)
    assert np.max(np.abs(combined.stacked - f1.stacked - f2.stacked)) <= 1e-12 * scale


def test_passive_tracer():
    rng = default_rng(23)
    from filstokes.verify import random_smooth_curve

    for _ in range(5):
        c = random_smooth_curve(rng, n=96)
        U = rng.standard_normal(3)
        K = resistance_matrix(c, np.zeros(3))
        load = faxen_load(c, np.zeros(3), constant_flow(U))
        tw = solve_quasistatic(K, load)
        assert np.max(np.abs(tw.linear - U)) <= 1e-10
        assert np.max(np.abs(tw.angular)) <= 1e-10


def test_solve_zero_load():
    c = unit_circle(96)
    K = resistance_matrix(c, np.zeros(3))
    tw = solve_quasistatic(K, faxen_load(c, np.zeros(3), constant_flow([0, 0, 0])))
    assert np.max(np.abs(tw.stacked)) == 0.0


def test_jeffery_rotation_of_tilted_ellipse():
    # shear flow turns an inclined ellipse: nonzero angular velocity,
    # checked by quadrature self-convergence under node doubling
    flow = shear_flow(1.0)
    Q = rotation_from_axis_angle([1.0, 0, 0], PI / 6)
    results = {}
    for n in (256, 512):
        c = recenter(curve_from_spec(
            {"preset": "ellipse", "params": {"a": 1.0, "b": 0.5}, "nodes": n}
        ))[0]
        world = place(c, Pose(np.zeros(3), Q))
        K = resistance_matrix(world, np.zeros(3))
        load = faxen_load(world, np.zeros(3), flow)
        results[n] = solve_quasistatic(K, load)
    assert np.linalg.norm(results[512].angular) > 0.05
    diff = np.max(np.abs(results[256].stacked - results[512].stacked))
    assert diff <= 1e-12 * max(1.0, np.max(np.abs(results[512].stacked)))


def test_near_straight_curve_is_ill_conditioned():
    delta = 3e-7
    fn = lambda t: np.stack(
        [t, delta * np.sin(PI * t), np.zeros_like(t)], axis=-1
    )
    c = resample_arclength(fn, 64, closed=False)
    c, _ = recenter(c)
    assert not c.is_straight()
    K = resistance_matrix(c, np.zeros(3))
    with pytest.raises(IllConditionedError):
        solve_quasistatic(K, faxen_load(c, np.zeros(3), constant_flow([1.0, 0, 0])))


def test_straight_curve_rejected():
    samples = np.linspace(0, 1, 33)[:, None] * np.array([1.0, 0.0, 0.0])
    c = resample_arclength(samples, 16, closed=False)
    with pytest.raises(StraightCurveError):
        resistance_matrix(c, np.zeros(3))


# -- inertia -------------------------------------------------------------------

def brute_circle_inertia(m=8192, area=PI, density=1.0):
    th = np.linspace(0, 2 * PI, m, endpoint=False)
    x = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=-1)
    w = 2 * PI / m
    mass = density * area * w * m
    r2 = np.einsum("md,md->m", x, x)
    J = density * area * w * (
        np.eye(3) * np.sum(r2) - np.einsum("md,me->de", x, x)
    )
    return mass, J


def test_inertia_circle():
    c = unit_circle(256)
    xsec = circular_cross_section(c, radius=1.0, thickness=0.05)
    spec = inertia_from_filament(c, xsec, 1.0)
    mass_oracle, J_oracle = brute_circle_inertia()
    assert abs(spec.mass_scaled - 2 * PI**2) <= 1e-8
    assert abs(spec.mass_scaled - mass_oracle) <= 1e-6
    expected_J = PI**2 * np.diag([1.0, 1.0, 2.0])
    assert np.max(np.abs(spec.inertia_body - expected_J)) <= 1e-8
    assert np.max(np.abs(spec.inertia_body - J_oracle)) <= 1e-6


def test_inertia_density_linearity():
    c = unit_circle(96)
    xsec = circular_cross_section(c, radius=0.7, thickness=0.05)
    one = inertia_from_filament(c, xsec, 1.0)
    two = inertia_from_filament(c, xsec, 2.0)
    assert abs(two.mass_scaled - 2 * one.mass_scaled) <= 1e-12 * one.mass_scaled
    assert np.allclose(two.inertia_body, 2 * one.inertia_body, rtol=1e-12)


def test_inertia_rejects_zero_area():
    c = unit_circle(96)
    with pytest.raises(PreconditionError):
        circular_cross_section(c, radius=0.0, thickness=0.05)
    with pytest.raises(PreconditionError):
        InertiaSpec(0.0, np.eye(3))


# -- Archimedes ----------------------------------------------------------------

def test_archimedes_constant_flow_is_zero():
    c = unit_circle(96)
    xsec = circular_cross_section(c, radius=1.0, thickness=0.01)
    w = archimedes_load(c, xsec, constant_flow([1.0, 2.0, 3.0]), np.zeros(3))
    assert np.max(np.abs(w.stacked)) == 0.0


def test_archimedes_constant_forcing():
    # forcing Delta u + grad p = e3; circle with unit-disc section, eps = 0.01
    c = unit_circle(128)
    xsec = circular_cross_section(c, radius=1.0, thickness=0.01)
    flow = BackgroundFlow(
        velocity=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        gradient=lambda t, x: np.zeros(np.asarray(x).shape[:-1] + (3, 3)),
        laplacian=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        pressure_gradient=lambda t, x: np.broadcast_to(
            np.array([0.0, 0.0, 1.0]), np.asarray(x, dtype=float).shape
        ).copy(),
    )
    w = archimedes_load(c, xsec, flow, np.zeros(3))
    expected = 1e-4 * PI * 2 * PI
    assert abs(w.force[2] - expected) <= 1e-10
    assert np.max(np.abs(w.force[:2])) <= 1e-12


def quadratic_shear_flow():
    # u = (x2^2, 0, 0): divergence-free, Delta u = (2, 0, 0)
    def velocity(t, x):
        x = np.asarray(x, dtype=float)
        u = np.zeros_like(x)
        u[..., 0] = x[..., 1] ** 2
        return u

    def gradient(t, x):
        x = np.asarray(x, dtype=float)
        g = np.zeros(x.shape[:-1] + (3, 3))
        g[..., 0, 1] = 2 * x[..., 1]
        return g

    def laplacian(t, x):
        x = np.asarray(x, dtype=float)
        lap = np.zeros_like(x)
        lap[..., 0] = 2.0
        return lap

    return BackgroundFlow(
        velocity=velocity,
        gradient=gradient,
        laplacian=laplacian,
        pressure_gradient=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        name="quadratic_shear",
    )


def test_archimedes_quadratic_flow_against_dense_quadrature():
    eps = 0.03
    area = PI * 0.8**2
    center = np.array([0.3, -0.2, 0.1])
    c = recenter(curve_from_spec({"preset": "ellipse", "nodes": 256}))[0]
    xsec = circular_cross_section(c, radius=0.8, thickness=eps)
    w = archimedes_load(c, xsec, quadratic_shear_flow(), center)
    # dense quadrature oracle on a 4096-node resampling of the same ellipse
    dense = recenter(curve_from_spec({"preset": "ellipse", "nodes": 4096}))[0]
    forcing = np.zeros_like(dense.nodes)
    forcing[:, 0] = 2.0
    f_oracle = eps**2 * area * dense.arc_weights @ forcing
    t_oracle = eps**2 * area * dense.arc_weights @ np.cross(
        dense.nodes - center, forcing
    )
    assert np.max(np.abs(w.force - f_oracle)) <= 1e-8
    assert np.max(np.abs(w.torque - t_oracle)) <= 1e-8


# -- structural properties ------------------------------------------------------

def test_resistance_spd_and_coercive_random():
    from filstokes.verify import random_smooth_curve

    rng = default_rng(24)
    for _ in range(10):
        c = random_smooth_curve(rng, n=96, closed=bool(rng.integers(2)))
        K = resistance_matrix(c, np.zeros(3))
        assert np.linalg.eigvalsh(K.entries)[0] > 0
        scale = np.max(np.abs(K.entries))
        assert np.max(np.abs(K.entries - K.entries.T)) <= 1e-10 * scale
        for _ in range(10):
            y = rng.standard_normal(6)
            field = y[:3] + np.cross(y[3:], c.nodes)
            quad = float(c.arc_weights @ np.einsum("nd,nd->n", field, field))
            assert y @ K.entries @ y >= 2 * PI * quad - 1e-8 * scale
