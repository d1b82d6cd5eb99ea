"""Machine-checkable invariant suites for the CLI `verify` subcommand.

Each suite returns a list of {"name", "passed", "detail"} records; the
checks mirror the per-module invariants (kernel identities, resistance
symmetry/coercivity, integrator order, field diagnostics) at sizes that
run in seconds.
"""

import numpy as np
from numpy.random import default_rng

from .curves import Pose, TwistVelocity, place, recenter, resample_arclength
from .dynamics import (
    integrate_limit,
    integrate_relaxation,
    make_system_state,
)
from .errors import ConfigError
from .flows import constant_flow, rigid_vortex_flow, shear_flow
from .flowfield import (
    GridSpec,
    density_from_field,
    density_from_twist,
    divergence_check,
    fit_log_law,
    line_velocity,
    near_field_log_law,
    perturbation_field,
    total_line_force,
)
from .kernels import drag_matrix, oseen, pressure_kernel, s0
from .mobility import (
    conjugate_resistance,
    faxen_load,
    inertia_from_filament,
    resistance_matrix,
    solve_quasistatic,
)
from .curves import circular_cross_section
from .so3 import random_rotation


def _check(name, passed, detail=""):
    return {"name": name, "passed": bool(passed), "detail": detail}


def random_unit_vectors(rng, m):
    v = rng.standard_normal((m, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def random_fourier_fn(rng, modes=3, amplitude=0.25):
    """Random closed-curve parametrization: circle plus Fourier wiggles."""
    coeffs = [
        (amplitude / (k * k) * rng.standard_normal(3),
         amplitude / (k * k) * rng.standard_normal(3))
        for k in range(1, modes + 1)
    ]

    def fn(t):
        th = 2 * np.pi * np.asarray(t, dtype=float)
        base = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=-1)
        for k, (a, b) in enumerate(coeffs, start=1):
            base = base + np.outer(np.cos(k * th), a) + np.outer(np.sin(k * th), b)
        return base

    return fn


def random_smooth_curve(rng, n=96, closed=True, modes=3, amplitude=0.25):
    """Random non-straight curve: closed loop or an open arc of one."""
    fn = random_fourier_fn(rng, modes=modes, amplitude=amplitude)
    if closed:
        curve = resample_arclength(fn, n, closed=True)
    else:
        curve = resample_arclength(lambda t: fn(0.35 * t), n, closed=False)
    curve, _ = recenter(curve)
    return curve


def verify_kernels(seed=0):
    rng = default_rng(seed)
    checks = []
    ps = random_unit_vectors(rng, 10_000)
    worst_id = max(
        np.max(np.abs(s0(p) @ drag_matrix(p) - np.eye(3))) for p in ps[:10_000]
    )
    checks.append(_check(
        "s0_times_drag_is_identity", worst_id <= 1e-12,
        f"max deviation {worst_id:.3e} over {len(ps)} unit vectors",
    ))
    vs = random_unit_vectors(rng, 10_000)
    worst_lb = min(float(v @ drag_matrix(p) @ v) for p, v in zip(ps, vs))
    checks.append(_check(
        "drag_lower_bound_4pi", worst_lb >= 4 * np.pi - 1e-10,
        f"min k(p)v.v = {worst_lb:.12f} vs 4pi = {4 * np.pi:.12f}",
    ))
    x = rng.standard_normal(3)
    hom = np.max(np.abs(oseen(2.5 * x) - oseen(x) / 2.5))
    checks.append(_check("oseen_homogeneous_-1", hom <= 1e-12, f"deviation {hom:.3e}"))
    homp = np.max(np.abs(pressure_kernel(2.0 * x) - pressure_kernel(x) / 4.0))
    checks.append(_check("pressure_homogeneous_-2", homp <= 1e-12, f"deviation {homp:.3e}"))
    odd = np.max(np.abs(pressure_kernel(-x) + pressure_kernel(x)))
    checks.append(_check("pressure_kernel_odd", odd <= 1e-14, f"deviation {odd:.3e}"))
    return checks


def verify_mobility(seed=0):
    rng = default_rng(seed)
    checks = []

    circle = resample_arclength(
        lambda t: np.stack(
            [np.cos(2 * np.pi * t), np.sin(2 * np.pi * t), np.zeros_like(t)], axis=-1
        ),
        512,
        closed=True,
    )
    circle, _ = recenter(circle)
    K = resistance_matrix(circle, np.zeros(3)).entries
    expected = np.diag([6, 6, 8, 4, 4, 4]) * np.pi**2
    err = np.max(np.abs(K - expected)) / np.max(np.abs(expected))
    checks.append(_check(
        "circle_resistance_closed_form", err <= 1e-8,
        f"relative deviation {err:.3e}",
    ))

    sym_worst, spd_worst, coer_worst = 0.0, np.inf, 0.0
    for _ in range(25):
        c = random_smooth_curve(rng, n=96, closed=bool(rng.integers(2)))
        Km = resistance_matrix(c, np.zeros(3))
        A = Km.entries
        sym_worst = max(sym_worst, np.max(np.abs(A - A.T)) / np.max(np.abs(A)))
        spd_worst = min(spd_worst, float(np.linalg.eigvalsh(A)[0]))
        for _ in range(20):
            y = rng.standard_normal(6)
            field = y[:3] + np.cross(y[3:], c.nodes)
            quad = float(c.arc_weights @ np.einsum("nd,nd->n", field, field))
            gap = float(y @ A @ y) - 2 * np.pi * quad
            coer_worst = min(coer_worst, gap / max(np.max(np.abs(A)), 1.0))
    checks.append(_check("resistance_symmetric", sym_worst <= 1e-10,
                         f"max relative asymmetry {sym_worst:.3e}"))
    checks.append(_check("resistance_spd", spd_worst > 0,
                         f"min eigenvalue {spd_worst:.6f}"))
    checks.append(_check("resistance_coercive", coer_worst >= -1e-8,
                         f"min normalized coercivity gap {coer_worst:.3e}"))

    sylv_worst = 0.0
    body = random_smooth_curve(rng, n=96)
    K_body = resistance_matrix(body, np.zeros(3))
    for _ in range(20):
        Q = random_rotation(rng)
        h = rng.standard_normal(3)
        world = place(body, Pose(h, Q))
        K_world = resistance_matrix(world, h).entries
        K_conj = conjugate_resistance(K_body, Q).entries
        sylv_worst = max(
            sylv_worst, np.max(np.abs(K_world - K_conj)) / np.max(np.abs(K_world))
        )
    checks.append(_check("sylvester_conjugation", sylv_worst <= 1e-9,
                         f"max relative deviation {sylv_worst:.3e}"))

    tracer_worst = 0.0
    for _ in range(10):
        c = random_smooth_curve(rng, n=96)
        U = rng.standard_normal(3)
        flow = constant_flow(U)
        Km = resistance_matrix(c, np.zeros(3))
        load = faxen_load(c, np.zeros(3), flow)
        tw = solve_quasistatic(Km, load)
        tracer_worst = max(
            tracer_worst,
            float(np.max(np.abs(tw.linear - U))) + float(np.max(np.abs(tw.angular))),
        )
    checks.append(_check("passive_tracer_identity", tracer_worst <= 1e-10,
                         f"max deviation {tracer_worst:.3e}"))

    # quadrature convergence under node doubling
    fn = random_fourier_fn(rng)

    def k_at(n, closed):
        if closed:
            c = resample_arclength(fn, n, closed=True)
        else:
            c = resample_arclength(lambda t: fn(0.4 * t), n, closed=False)
        c, _ = recenter(c)
        return resistance_matrix(c, np.zeros(3)).entries

    Kc_ref = k_at(512, True)
    # the arc-length resampling itself carries a ~1e-11 relative floor
    spectral_err = np.max(np.abs(k_at(128, True) - Kc_ref)) / np.max(np.abs(Kc_ref))
    checks.append(_check("closed_quadrature_spectral", spectral_err <= 2e-9,
                         f"n=128 vs n=512 relative error {spectral_err:.3e}"))
    Ko_ref = k_at(2048, False)
    e1 = np.max(np.abs(k_at(64, False) - Ko_ref))
    e2 = np.max(np.abs(k_at(128, False) - Ko_ref))
    order = np.log2(e1 / e2)
    checks.append(_check("open_quadrature_4th_order", order >= 3.5,
                         f"observed order {order:.2f}"))
    return checks


def verify_dynamics(seed=0):
    rng = default_rng(seed)
    checks = []
    ring = random_smooth_curve(rng, n=64)
    U = np.array([0.4, -0.1, 0.3])
    traj = integrate_limit([ring], [Pose.identity()], constant_flow(U), T=1.0, dt=0.05)
    err = np.max(np.abs(traj.translations[-1, 0] - U))
    checks.append(_check("constant_flow_exact", err <= 1e-12, f"|h(1) - U| = {err:.3e}"))

    flow = rigid_vortex_flow([0.0, 0.0, 1.0])
    pose = Pose(np.array([1.0, 0.0, 0.3]), np.eye(3))
    finals = {}
    for dt in (0.1, 0.05, 0.025):
        tr = integrate_limit([ring], [pose], flow, T=1.0, dt=dt)
        finals[dt] = (tr.translations[-1, 0], tr.rotations[-1, 0])
    e1 = np.linalg.norm(finals[0.1][0] - finals[0.05][0]) + np.linalg.norm(
        finals[0.1][1] - finals[0.05][1]
    )
    e2 = np.linalg.norm(finals[0.05][0] - finals[0.025][0]) + np.linalg.norm(
        finals[0.05][1] - finals[0.025][1]
    )
    ratio = e1 / e2
    checks.append(_check("rk4_richardson_ratio", 14.0 <= ratio <= 18.0,
                         f"ratio {ratio:.2f} (expect 16 +- 2)"))

    drift = max(
        np.max(np.abs(np.einsum("mij,mkj->mik", tr.rotations[:, 0], tr.rotations[:, 0])
                      - np.eye(3)))
        for tr in (traj,)
    )
    checks.append(_check("orthogonality_drift", drift <= 1e-10, f"max drift {drift:.3e}"))

    far = Pose(np.array([50.0, 0.0, 0.0]), np.eye(3))
    shear = shear_flow(1.0)
    solo = integrate_limit([ring], [pose], shear, T=0.2, dt=0.02)
    duo = integrate_limit([ring, ring], [pose, far], shear, T=0.2, dt=0.02)
    dec = np.max(np.abs(solo.translations[:, 0] - duo.translations[:, 0]))
    checks.append(_check("hydrodynamic_decoupling", dec <= 1e-14,
                         f"max difference {dec:.3e}"))

    xsec = circular_cross_section(ring, radius=1.0, thickness=0.1)
    inertia = inertia_from_filament(ring, xsec, 1.0)
    state = make_system_state([pose], [ring])
    from scipy.linalg import eigh

    from .dynamics import make_relaxation_state

    rs = make_relaxation_state(state, shear, [ring], [inertia], eps=0.1)
    lam, _ = eigh(rs.K, rs.M)
    Y0 = rs.Y_faxen + 0.3 * rng.standard_normal(rs.Y.shape)
    tr = integrate_relaxation([ring], [pose], shear, [inertia], eps=0.1,
                              T=0.05, dt=2e-4, initial_twists=[Y0],
                              freeze_coefficients=True)
    gap = tr.twist_gap()
    bound = gap[0] * np.exp(-lam[0] / 0.01 * tr.times) * (1 + 1e-8)
    ok = np.all(gap <= bound + 1e-14)
    checks.append(_check("frozen_relaxation_contraction", ok,
                         f"max gap/bound = {np.max(gap / np.maximum(bound, 1e-300)):.6f}"))
    return checks


def verify_flowfield(seed=0):
    rng = default_rng(seed)
    checks = []
    ring = resample_arclength(
        lambda t: np.stack(
            [np.cos(2 * np.pi * t), np.sin(2 * np.pi * t), np.zeros_like(t)], axis=-1
        ),
        128,
        closed=True,
    )
    ring, _ = recenter(ring)

    v1 = rng.standard_normal((ring.n, 3))
    v2 = rng.standard_normal((ring.n, 3))
    x = np.array([1.7, -0.4, 0.8])
    lin = np.max(np.abs(
        line_velocity(ring, v1 + v2, x)
        - line_velocity(ring, v1, x)
        - line_velocity(ring, v2, x)
    ))
    checks.append(_check("line_velocity_linear", lin <= 1e-12, f"deviation {lin:.3e}"))

    dens = density_from_field(ring, np.array([0.0, 0.0, 1.0]))
    m = total_line_force(dens)
    far = np.array([100.0, 0.0, 0.0])
    U = line_velocity(ring, dens, far)
    mono = oseen(far) @ m
    rel = np.linalg.norm(U - mono) / np.linalg.norm(mono)
    checks.append(_check("far_field_monopole", rel <= 0.01, f"relative error {rel:.3e}"))

    flow = constant_flow([0.0, 0.0, 0.0])
    state = make_system_state([Pose.identity()], [ring])
    tw = [TwistVelocity([0, 0, 1.0], [0, 0, 0])]
    ratios = []
    vals = {}
    for spacing, dims in ((0.1, 17), (0.05, 33)):
        grid = perturbation_field(
            state, flow, [ring],
            GridSpec(origin=[-0.8, -0.8, 0.4], spacing=spacing, dims=(dims,) * 3),
            twists=tw,
        )
        vals[spacing] = divergence_check(grid)
    ratios.append(vals[0.1] / vals[0.05])
    checks.append(_check("divergence_second_order", 2.5 <= ratios[0] <= 6.5,
                         f"refinement ratio {ratios[0]:.2f} (expect ~4)"))

    rows = near_field_log_law(ring, [0.0, 0.0, 1.0], [1e-2, 1e-3])
    _, dev = fit_log_law(rows)
    checks.append(_check("near_field_log_law", dev <= 0.3,
                         f"max relative deviation from C/|log eps| fit {dev:.3e}"))

    twist = TwistVelocity(rng.standard_normal(3), rng.standard_normal(3))
    d2 = density_from_twist(ring, np.zeros(3), twist)
    direct = ring.arc_weights @ d2.density
    total = total_line_force(d2)
    tf = np.max(np.abs(total - direct))
    checks.append(_check("total_force_matches_quadrature", tf <= 1e-10,
                         f"deviation {tf:.3e}"))
    return checks


SUITES = {
    "kernels": verify_kernels,
    "mobility": verify_mobility,
    "dynamics": verify_dynamics,
    "flowfield": verify_flowfield,
}


def run_suite(name, seed=0):
    """Run one named suite or 'all'; returns a list of check records."""
    if name == "all":
        out = []
        for suite in ("kernels", "mobility", "dynamics", "flowfield"):
            for check in SUITES[suite](seed=seed):
                check = dict(check)
                check["name"] = f"{suite}.{check['name']}"
                out.append(check)
        return out
    if name not in SUITES:
        raise ConfigError(f"unknown verify suite {name!r}; have "
                          f"{sorted(SUITES) + ['all']}")
    return SUITES[name](seed=seed)
