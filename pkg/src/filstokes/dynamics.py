"""Time integration of the limit and relaxation filament dynamics.

The limit model is a set of decoupled first-order rigid-body ODEs driven by
the quasi-static balance of resistance against the Faxen load; it is
integrated with a 4th-order Munthe-Kaas scheme on SO(3).  The relaxation
model is the singularly perturbed second-order system

    eps^2 d/dt(M Y) = -K (Y - Y_faxen) + f_a,      K = K_hat / |log eps|,

stepped with an exponential integrator that is exact on the
frozen-coefficient linear part.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh

from .curves import Pose, TwistVelocity, min_distance, place
from .errors import CollisionHalt, PreconditionError
from .mobility import (
    archimedes_load,
    faxen_load,
    resistance_matrix,
    solve_quasistatic,
)
from .so3 import dexpinv_so3, exp_so3, hat, polar_project

DECAY_FIT_WINDOW = (1e-6, 0.5)


@dataclass(frozen=True)
class BodyState:
    """Pose plus (for the relaxation model) the instantaneous twist."""

    pose: Pose
    twist: TwistVelocity = None


@dataclass(frozen=True)
class SystemState:
    """Poses of all bodies at one time, with the cached minimum distance."""

    bodies: tuple
    time: float
    d_min: float

    @property
    def n_bodies(self):
        return len(self.bodies)

    def placed(self, curves):
        return [place(c, b.pose) for c, b in zip(curves, self.bodies)]


@dataclass(frozen=True)
class RelaxationState:
    """Stacked twists and frozen coefficients of the compressed system."""

    Y: np.ndarray
    Y_faxen: np.ndarray
    M: np.ndarray
    K: np.ndarray
    f_a: np.ndarray
    eps: float
    log_factor: float


@dataclass(frozen=True)
class EnergyDiagnostic:
    E: float
    Z: float
    t: float


@dataclass
class Trajectory:
    """Recorded time series of one run."""

    model: str
    times: np.ndarray
    translations: np.ndarray  # (m, N, 3)
    rotations: np.ndarray  # (m, N, 3, 3)
    twists: np.ndarray  # (m, N, 6)
    d_min: np.ndarray
    energy: np.ndarray
    z: np.ndarray
    faxen: np.ndarray = None  # (m, N, 6), relaxation only
    eps: float = None
    dt: float = None
    halted_at_collision: bool = False
    collision_time: float = None
    lambda_min: float = None

    @property
    def n_bodies(self):
        return self.translations.shape[1]

    def twist_gap(self):
        """|Y - Y_faxen| per recorded time (relaxation runs)."""
        if self.faxen is None:
            raise PreconditionError("twist gap is only defined for relaxation runs")
        diff = (self.twists - self.faxen).reshape(len(self.times), -1)
        return np.linalg.norm(diff, axis=1)


def make_system_state(poses, curves, time=0.0, twists=None):
    bodies = []
    for i, pose in enumerate(poses):
        tw = None if twists is None else twists[i]
        bodies.append(BodyState(pose=pose, twist=tw))
    state = SystemState(bodies=tuple(bodies), time=float(time), d_min=np.inf)
    return replace(state, d_min=system_min_distance(state, curves))


def system_min_distance(state, curves):
    placed = state.placed(curves)
    best = np.inf
    for i in range(len(placed)):
        for j in range(i + 1, len(placed)):
            best = min(best, min_distance(placed[i], placed[j]))
    return float(best)


def _body_rhs(t, h, Q, curve, flow):
    world = place(curve, Pose(h, Q))
    K = resistance_matrix(world, h)
    f = faxen_load(world, h, flow, t)
    return solve_quasistatic(K, f)


def limit_rhs(state, flow, curves):
    """Quasi-static twists of every body; bodies are hydrodynamically decoupled."""
    return [
        _body_rhs(state.time, b.pose.translation, b.pose.rotation, c, flow)
        for b, c in zip(state.bodies, curves)
    ]


def faxen_stack(state, flow, curves):
    """Stacked per-body quasi-static twists as a 6N vector.

    The surrogate coefficients K = K_hat/|log eps|, f = f_flat/|log eps|
    cancel in the balance, so the Faxen velocities equal the limit twists
    at the current poses.
    """
    twists = limit_rhs(state, flow, curves)
    return np.concatenate([tw.stacked for tw in twists])


def _mk4_step(t, hs, Qs, dt, flow, curves, k1=None):
    """One Munthe-Kaas RK4 step for the coupled (h, Q) system.

    Returns (new hs, new Qs, stage-1 twists used).  k1 may be passed in to
    reuse the rhs evaluation from the end of the previous step.
    """
    n = len(curves)

    def rhs(tt, hh, QQ):
        out = np.empty((n, 6))
        for i in range(n):
            tw = _body_rhs(tt, hh[i], QQ[i], curves[i], flow)
            out[i] = tw.stacked
        return out

    if k1 is None:
        k1 = rhs(t, hs, Qs)

    def stage(c, kh, kw_corr):
        hh = hs + dt * c * kh
        QQ = np.array([exp_so3(dt * c * kw_corr[i]) @ Qs[i] for i in range(n)])
        return hh, QQ

    kw1 = k1[:, 3:]
    h2, Q2 = stage(0.5, k1[:, :3], kw1)
    f2 = rhs(t + 0.5 * dt, h2, Q2)
    kw2 = np.array([dexpinv_so3(0.5 * dt * kw1[i], f2[i, 3:]) for i in range(n)])
    h3, Q3 = stage(0.5, f2[:, :3], kw2)
    f3 = rhs(t + 0.5 * dt, h3, Q3)
    kw3 = np.array([dexpinv_so3(0.5 * dt * kw2[i], f3[i, 3:]) for i in range(n)])
    h4, Q4 = stage(1.0, f3[:, :3], kw3)
    f4 = rhs(t + dt, h4, Q4)
    kw4 = np.array([dexpinv_so3(dt * kw3[i], f4[i, 3:]) for i in range(n)])

    new_h = hs + dt / 6.0 * (k1[:, :3] + 2 * f2[:, :3] + 2 * f3[:, :3] + f4[:, :3])
    theta = dt / 6.0 * (kw1 + 2 * kw2 + 2 * kw3 + kw4)
    new_Q = np.array(
        [polar_project(exp_so3(theta[i]) @ Qs[i]) for i in range(n)]
    )
    return new_h, new_Q, k1


def step_limit(state, dt, flow, curves, collision_threshold=0.0):
    """Advance the limit dynamics by one RK4 step; halts on collision."""
    if dt <= 0:
        raise PreconditionError("dt must be positive")
    hs = np.array([b.pose.translation for b in state.bodies])
    Qs = np.array([b.pose.rotation for b in state.bodies])
    new_h, new_Q, _ = _mk4_step(state.time, hs, Qs, dt, flow, curves)
    poses = [Pose(new_h[i], new_Q[i]) for i in range(len(curves))]
    new_state = make_system_state(poses, curves, time=state.time + dt)
    twists = limit_rhs(new_state, flow, curves)
    bodies = tuple(
        BodyState(pose=p, twist=tw) for p, tw in zip(poses, twists)
    )
    new_state = replace(new_state, bodies=bodies)
    if new_state.d_min <= collision_threshold:
        raise CollisionHalt(new_state.time, new_state.d_min, collision_threshold)
    return new_state


def default_collision_threshold(curves):
    return 1e-3 * min(c.length for c in curves)


def integrate_limit(curves, poses, flow, T, dt, collision_threshold=None,
                    t0=0.0, record_every=1):
    """Integrate the limit model on [t0, t0+T] with fixed dt.

    Returns a Trajectory; on collision the trajectory is truncated at the
    numerical first-collision time and flagged.
    """
    if T <= 0 or dt <= 0:
        raise PreconditionError("horizon and step must be positive")
    if collision_threshold is None:
        collision_threshold = default_collision_threshold(curves)
    state = make_system_state(poses, curves, time=t0)
    if state.d_min <= collision_threshold:
        raise PreconditionError(
            f"initial configuration overlaps: d_min={state.d_min:.3g} <= "
            f"threshold={collision_threshold:.3g}"
        )
    n_steps = int(round(T / dt))
    n = len(curves)
    hs = np.array([p.translation for p in poses])
    Qs = np.array([p.rotation for p in poses])

    rec_t, rec_h, rec_Q, rec_y, rec_d = [], [], [], [], []

    def rhs_all(tt, hh, QQ):
        out = np.empty((n, 6))
        for i in range(n):
            out[i] = _body_rhs(tt, hh[i], QQ[i], curves[i], flow).stacked
        return out

    k1 = rhs_all(t0, hs, Qs)

    def record(tt, hh, QQ, yy, dmin):
        rec_t.append(tt)
        rec_h.append(hh.copy())
        rec_Q.append(QQ.copy())
        rec_y.append(yy.copy())
        rec_d.append(dmin)

    record(t0, hs, Qs, k1, state.d_min)
    halted = False
    collision_time = None
    t = t0
    for step in range(n_steps):
        hs, Qs, _ = _mk4_step(t, hs, Qs, dt, flow, curves, k1=k1)
        t = t0 + (step + 1) * dt
        k1 = rhs_all(t, hs, Qs)
        poses_now = [Pose(hs[i], Qs[i]) for i in range(n)]
        state = make_system_state(poses_now, curves, time=t)
        collided = state.d_min <= collision_threshold
        if (step + 1) % record_every == 0 or step == n_steps - 1 or collided:
            record(t, hs, Qs, k1, state.d_min)
        if collided:
            halted = True
            collision_time = t
            break

    m = len(rec_t)
    return Trajectory(
        model="limit",
        times=np.array(rec_t),
        translations=np.array(rec_h),
        rotations=np.array(rec_Q),
        twists=np.array(rec_y),
        d_min=np.array(rec_d),
        energy=np.zeros(m),
        z=np.zeros(m),
        dt=dt,
        halted_at_collision=halted,
        collision_time=collision_time,
    )


def simulate_limit(config):
    """Run the limit model from a SimConfig (see filstokes.config)."""
    from .config import build_scene

    scene = build_scene(config)
    return integrate_limit(
        scene.curves,
        scene.poses,
        scene.flow,
        config.T,
        config.dt,
        collision_threshold=scene.collision_threshold,
    )


# -- relaxation model ---------------------------------------------------------

def _relaxation_coefficients(t, poses, flow, curves, inertias, eps, xsecs=None):
    """Frozen coefficients (K, M, Y_faxen, f_a) at the given poses."""
    n = len(curves)
    logf = abs(math.log(eps))
    K = np.zeros((6 * n, 6 * n))
    M = np.zeros((6 * n, 6 * n))
    Yb = np.zeros(6 * n)
    fa = np.zeros(6 * n)
    placed = []
    for i in range(n):
        h, Q = poses[i].translation, poses[i].rotation
        world = place(curves[i], poses[i])
        placed.append(world)
        Khat = resistance_matrix(world, h)
        load = faxen_load(world, h, flow, t)
        sl = slice(6 * i, 6 * i + 6)
        K[sl, sl] = Khat.entries / logf
        Yb[sl] = solve_quasistatic(Khat, load).stacked
        M[6 * i: 6 * i + 3, 6 * i: 6 * i + 3] = inertias[i].mass_scaled * np.eye(3)
        J = Q @ inertias[i].inertia_body @ Q.T
        M[6 * i + 3: 6 * i + 6, 6 * i + 3: 6 * i + 6] = 0.5 * (J + J.T)
        if xsecs is not None:
            fa[sl] = archimedes_load(world, xsecs[i], flow, h, t).stacked
    return K, M, Yb, fa, placed


def make_relaxation_state(state, flow, curves, inertias, eps, xsecs=None, Y=None):
    """Assemble a RelaxationState at the given system state.

    Y defaults to the Faxen velocities (compatible initial data, no layer).
    """
    if not 0.0 < eps < 1.0:
        raise PreconditionError(f"eps must lie in (0, 1), got {eps}")
    poses = [b.pose for b in state.bodies]
    K, M, Yb, fa, _ = _relaxation_coefficients(
        state.time, poses, flow, curves, inertias, eps, xsecs
    )
    if Y is None:
        Y = Yb.copy()
    Y = np.asarray(Y, dtype=float).reshape(6 * len(curves))
    return RelaxationState(
        Y=Y, Y_faxen=Yb, M=M, K=K, f_a=fa, eps=float(eps),
        log_factor=abs(math.log(eps)),
    )


def frozen_step(Y, Y_faxen, M, K, f_a, eps, dt):
    """Exact step of eps^2 M Y' = -K (Y - Y_faxen) + f_a with frozen coefficients.

    Returns (Y_new, displacement = integral of Y over the step, lambda_min)
    where lambda_min is the smallest eigenvalue of M^{-1} K.
    """
    lam, U = eigh(K, M)  # K U = M U diag(lam), U^T M U = Id
    Yp = Y_faxen + np.linalg.solve(K, f_a)
    z0 = U.T @ (M @ (Y - Yp))
    x = lam * dt / eps**2
    decay = np.exp(-x)
    Y_new = Yp + U @ (decay * z0)
    # integral of e^{-A s} over the step: U diag(eps^2 (1-decay)/lam) U^T M
    phi = eps**2 * (-np.expm1(-x)) / lam
    disp = dt * Yp + U @ (phi * z0)
    return Y_new, disp, float(lam[0])


def _advance_poses(poses, disp):
    out = []
    for i, pose in enumerate(poses):
        d = disp[6 * i: 6 * i + 6]
        Q = polar_project(exp_so3(d[3:]) @ pose.rotation)
        out.append(Pose(pose.translation + d[:3], Q))
    return out


def step_relaxation(rstate, state, dt, flow, curves, inertias, xsecs=None,
                    collision_threshold=0.0, freeze_coefficients=False):
    """One exponential-integrator step of the relaxation model.

    Coefficients are refreshed at the step midpoint (exponential midpoint
    rule) unless freeze_coefficients is set, in which case the coefficients
    stored in rstate are used unchanged for the whole run.  The step is
    exact whenever the coefficients are constant.
    """
    if dt <= 0:
        raise PreconditionError("dt must be positive")
    poses = [b.pose for b in state.bodies]
    eps = rstate.eps
    if freeze_coefficients:
        K, M, Yb, fa = rstate.K, rstate.M, rstate.Y_faxen, rstate.f_a
    else:
        # midpoint predictor on the poses, then refresh the coefficients there
        _, disp_half, _ = frozen_step(
            rstate.Y, rstate.Y_faxen, rstate.M, rstate.K, rstate.f_a, eps, 0.5 * dt
        )
        poses_half = _advance_poses(poses, disp_half)
        K, M, Yb, fa, _ = _relaxation_coefficients(
            state.time + 0.5 * dt, poses_half, flow, curves, inertias, eps, xsecs
        )
    Y_new, disp, _ = frozen_step(rstate.Y, Yb, M, K, fa, eps, dt)
    new_poses = _advance_poses(poses, disp)

    t_new = state.time + dt
    if freeze_coefficients:
        new_rstate = replace(rstate, Y=Y_new)
    else:
        K2, M2, Yb2, fa2, _ = _relaxation_coefficients(
            t_new, new_poses, flow, curves, inertias, eps, xsecs
        )
        new_rstate = RelaxationState(
            Y=Y_new, Y_faxen=Yb2, M=M2, K=K2, f_a=fa2, eps=eps,
            log_factor=rstate.log_factor,
        )

    twists = [TwistVelocity(Y_new[6 * i: 6 * i + 3], Y_new[6 * i + 3: 6 * i + 6])
              for i in range(len(curves))]
    bodies = tuple(BodyState(pose=p, twist=tw) for p, tw in zip(new_poses, twists))
    new_state = SystemState(bodies=bodies, time=t_new, d_min=np.inf)
    new_state = replace(new_state, d_min=system_min_distance(new_state, curves))
    if new_state.d_min <= collision_threshold:
        raise CollisionHalt(t_new, new_state.d_min, collision_threshold)
    return new_rstate, new_state


def modulated_energy(rstate, t=0.0):
    """E = (Y - Y_faxen) . M (Y - Y_faxen) / 2 and Z = sqrt(E)."""
    d = rstate.Y - rstate.Y_faxen
    E = max(0.5 * float(d @ (rstate.M @ d)), 0.0)
    return EnergyDiagnostic(E=E, Z=math.sqrt(E), t=t)


def integrate_relaxation(curves, poses, flow, inertias, eps, T, dt,
                         xsecs=None, initial_twists=None,
                         collision_threshold=None, t0=0.0, record_every=1,
                         freeze_coefficients=False):
    """Integrate the relaxation model on [t0, t0+T] with fixed dt."""
    if T <= 0 or dt <= 0:
        raise PreconditionError("horizon and step must be positive")
    if collision_threshold is None:
        collision_threshold = default_collision_threshold(curves)
    state = make_system_state(poses, curves, time=t0)
    if state.d_min <= collision_threshold:
        raise PreconditionError(
            f"initial configuration overlaps: d_min={state.d_min:.3g} <= "
            f"threshold={collision_threshold:.3g}"
        )
    Y0 = None
    if initial_twists is not None:
        Y0 = np.concatenate([
            tw.stacked if isinstance(tw, TwistVelocity)
            else np.asarray(tw, dtype=float).reshape(6)
            for tw in initial_twists
        ])
    rstate = make_relaxation_state(state, flow, curves, inertias, eps,
                                   xsecs=xsecs, Y=Y0)
    lam0, _ = eigh(rstate.K, rstate.M)
    lambda_min = float(lam0[0])

    n = len(curves)
    rec_t, rec_h, rec_Q, rec_y, rec_yb, rec_d, rec_E, rec_Z = ([] for _ in range(8))

    def record(rs, st):
        diag = modulated_energy(rs, t=st.time)
        rec_t.append(st.time)
        rec_h.append([b.pose.translation for b in st.bodies])
        rec_Q.append([b.pose.rotation for b in st.bodies])
        rec_y.append(rs.Y.reshape(n, 6).copy())
        rec_yb.append(rs.Y_faxen.reshape(n, 6).copy())
        rec_d.append(st.d_min)
        rec_E.append(diag.E)
        rec_Z.append(diag.Z)

    record(rstate, state)
    n_steps = int(round(T / dt))
    halted = False
    collision_time = None
    for step in range(n_steps):
        try:
            rstate, state = step_relaxation(
                rstate, state, dt, flow, curves, inertias, xsecs=xsecs,
                collision_threshold=collision_threshold,
                freeze_coefficients=freeze_coefficients,
            )
        except CollisionHalt as halt:
            halted = True
            collision_time = halt.time
            break
        if (step + 1) % record_every == 0 or step == n_steps - 1:
            record(rstate, state)

    return Trajectory(
        model="relaxation",
        times=np.array(rec_t),
        translations=np.array(rec_h),
        rotations=np.array(rec_Q),
        twists=np.array(rec_y),
        d_min=np.array(rec_d),
        energy=np.array(rec_E),
        z=np.array(rec_Z),
        faxen=np.array(rec_yb),
        eps=eps,
        dt=dt,
        halted_at_collision=halted,
        collision_time=collision_time,
        lambda_min=lambda_min,
    )


def simulate_relaxation(config):
    """Run the relaxation model from a SimConfig (see filstokes.config)."""
    from .config import build_scene

    scene = build_scene(config)
    return integrate_relaxation(
        scene.curves,
        scene.poses,
        scene.flow,
        scene.inertias,
        config.eps,
        config.T,
        config.dt,
        xsecs=scene.cross_sections,
        initial_twists=scene.initial_twists,
        collision_threshold=scene.collision_threshold,
    )


# -- diagnostics --------------------------------------------------------------

def fit_decay_rate(times, gap, window=DECAY_FIT_WINDOW):
    """Least-squares exponent of gap ~ exp(-rate t), restricted to the window.

    The fit only uses samples with gap in [window[0], window[1]] * gap[0],
    which avoids both the multi-mode transient and the plateau floor.
    Returns (rate, number of points used); rate is None if the window holds
    fewer than two points.
    """
    times = np.asarray(times, dtype=float)
    gap = np.asarray(gap, dtype=float)
    if gap[0] <= 0:
        return None, 0
    lo, hi = window[0] * gap[0], window[1] * gap[0]
    mask = (gap >= lo) & (gap <= hi) & (gap > 0)
    if mask.sum() < 2:
        return None, int(mask.sum())
    t, g = times[mask], np.log(gap[mask])
    slope = np.polyfit(t, g, 1)[0]
    return float(-slope), int(mask.sum())


@dataclass
class TrajectoryComparison:
    """Error report between a relaxation run and a limit run on one grid."""

    times: np.ndarray
    pose_error: np.ndarray
    sup_pose_error: float
    twist_error: np.ndarray
    term_relaxation: np.ndarray  # |Y - Y_faxen|
    term_surrogate: np.ndarray  # |Y_faxen - Y_tilde|, identically 0 here
    term_limit: np.ndarray  # |Y_faxen - Y_hat|
    decay_rate: float
    decay_points: int


def compare_trajectories(relax, limit):
    """Sup-norm pose error, twist errors, and the three-term decomposition.

    The surrogate model evaluates the Faxen velocities with the same
    renormalized tensors as the limit dynamics, so the middle term of the
    decomposition vanishes identically; it is reported for structure.
    """
    if len(relax.times) != len(limit.times) or not np.allclose(
        relax.times, limit.times, rtol=0, atol=1e-12 * (1 + abs(limit.times[-1]))
    ):
        raise PreconditionError("trajectories are not on the same time grid")
    if relax.faxen is None:
        raise PreconditionError("first argument must be a relaxation trajectory")

    dh = np.linalg.norm(relax.translations - limit.translations, axis=2)
    dQ = np.linalg.norm(
        (relax.rotations - limit.rotations).reshape(len(relax.times), -1, 9), axis=2
    )
    pose_error = np.max(dh + dQ, axis=1)
    m = len(relax.times)
    twist_error = np.linalg.norm(
        (relax.twists - limit.twists).reshape(m, -1), axis=1
    )
    term_relax = np.linalg.norm((relax.twists - relax.faxen).reshape(m, -1), axis=1)
    term_limit = np.linalg.norm((relax.faxen - limit.twists).reshape(m, -1), axis=1)
    rate, npts = fit_decay_rate(relax.times, term_relax)
    return TrajectoryComparison(
        times=relax.times.copy(),
        pose_error=pose_error,
        sup_pose_error=float(np.max(pose_error)),
        twist_error=twist_error,
        term_relaxation=term_relax,
        term_surrogate=np.zeros(m),
        term_limit=term_limit,
        decay_rate=rate,
        decay_points=npts,
    )
