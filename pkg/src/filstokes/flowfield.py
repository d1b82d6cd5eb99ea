"""Leading-order perturbation velocity and pressure fields of the centerlines.

The field at x is the Stokeslet convolution of the line measure whose
density is f(y) = k(tau(y)) v(y) / 2.  Evaluation switches between the
curve's stored node rule (accurate away from the curve) and recursive
panel bisection on the arc-length spline when x comes close: panels are
split toward the closest point until the estimated error drops below
1e-8 of the result or 12 levels, whichever comes first.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .curves import twist_field
from .errors import PreconditionError, SingularPointError
from .kernels import drag_apply, oseen_apply, pressure_apply

ADAPTIVE_REL_TOL = 1e-8
MAX_BISECTION_LEVELS = 12
EXCLUSION_FACTOR = 3.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class LineMeasureDensity:
    """Vector measure density on a curve: per-node values of k(tau) v / 2."""

    curve: object
    density: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.density, dtype=float)
        if g.shape != (self.curve.n, 3):
            raise PreconditionError("density must be sampled at the curve nodes")
        if not np.all(np.isfinite(g)):
            raise PreconditionError("density values must be finite")
        object.__setattr__(self, "density", g)


def density_from_field(curve, v):
    """Line measure density from a node-sampled velocity field."""
    v = np.asarray(v, dtype=float)
    if v.shape == (3,):
        v = np.broadcast_to(v, (curve.n, 3))
    return LineMeasureDensity(curve, 0.5 * drag_apply(curve.tangents, v))


def density_from_twist(curve, center, twist, flow=None, t=0.0):
    """Density of the slip v + w x (x - center) - u_flat on the curve."""
    v = twist_field(curve.nodes, center, twist)
    if flow is not None:
        v = v - flow.velocity(t, curve.nodes)
    return density_from_field(curve, v)


def total_line_force(density):
    """Total mass of the line measure; vanishes for quasi-static solutions."""
    return density.curve.arc_weights @ density.density


@dataclass(frozen=True)
class FieldGrid:
    """Structured sample of the perturbation field.

    velocity: (nx, ny, nz, 3), pressure: (nx, ny, nz), mask True inside the
    exclusion radius around any curve (those samples are zero).
    """

    origin: np.ndarray
    spacing: float
    dims: tuple
    velocity: np.ndarray
    pressure: np.ndarray
    mask: np.ndarray

    def points(self):
        nx, ny, nz = self.dims
        idx = np.stack(
            np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"),
            axis=-1,
        )
        return self.origin + self.spacing * idx.astype(float)


def _distance_to_polyline(curve, X):
    """Distance from each point of X (m, 3) to the curve's polyline."""
    pts = curve.nodes
    if curve.closed:
        P0 = pts
        P1 = np.roll(pts, -1, axis=0)
    else:
        P0, P1 = pts[:-1], pts[1:]
    d = P1 - P0
    dd = np.einsum("sd,sd->s", d, d)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    best = np.full(len(X), np.inf)
    # chunk over points to bound memory
    step = max(1, int(2e6 // max(len(P0), 1)))
    for lo in range(0, len(X), step):
        xs = X[lo: lo + step]
        r = xs[:, None, :] - P0[None, :, :]
        tpar = np.clip(np.einsum("msd,sd->ms", r, d) / dd[None, :], 0.0, 1.0)
        closest = r - tpar[..., None] * d[None, :, :]
        best[lo: lo + step] = np.sqrt(
            np.min(np.einsum("msd,msd->ms", closest, closest), axis=1)
        )
    return best


class _LineIntegrand:
    """Arc-length splines for position and density; shared by both kernels."""

    def __init__(self, curve, density):
        self.curve = curve
        s = curve.arclengths
        g = np.asarray(density, dtype=float)
        if curve.closed:
            s = np.append(s, curve.length)
            g = np.vstack([g, g[:1]])
            self.gspline = CubicSpline(s, g, axis=0, bc_type="periodic")
        else:
            self.gspline = CubicSpline(s, g, axis=0)
        self.xspline = curve.spline

    def panels(self, a, b, x, kernel):
        """Gauss-Legendre panel integrals for edge arrays a, b (vectorized)."""
        a = np.atleast_1d(a)
        b = np.atleast_1d(b)
        half = 0.5 * (b - a)
        s = a[:, None] + half[:, None] * (_GL_NODES[None, :] + 1.0)
        flat = s.ravel()
        y = self.xspline(flat)
        speed = np.linalg.norm(self.xspline(flat, 1), axis=-1)
        g = self.gspline(flat)
        vals = kernel(x - y, g)
        vals = vals.reshape(s.shape + vals.shape[1:])
        w = _GL_WEIGHTS[None, :] * speed.reshape(s.shape)
        if vals.ndim == 3:
            return half[:, None] * np.einsum("pq,pqd->pd", w, vals)
        return half * np.einsum("pq,pq->p", w, vals)


def _adaptive_integral(integ, x, kernel, base_edges, rel_tol=ADAPTIVE_REL_TOL):
    """Worklist panel bisection toward the near-singular region.

    Each sweep halves every unconverged panel at once; a panel is accepted
    when its two-half refinement agrees with the coarse value within its
    share of the global tolerance, or after MAX_BISECTION_LEVELS splits.
    """
    a = np.asarray(base_edges[:-1], dtype=float)
    b = np.asarray(base_edges[1:], dtype=float)
    coarse = integ.panels(a, b, x, kernel)
    total = np.sum(coarse, axis=0)
    scale = float(np.max(np.abs(total)))
    tol = np.full(len(a), rel_tol * max(scale, 1e-300) / max(len(a), 1))

    result = np.zeros_like(total)
    for _ in range(MAX_BISECTION_LEVELS):
        mid = 0.5 * (a + b)
        left = integ.panels(a, mid, x, kernel)
        right = integ.panels(mid, b, x, kernel)
        fine = left + right
        err = np.max(np.abs(fine - coarse).reshape(len(a), -1), axis=1)
        done = err <= tol
        if np.any(done):
            result = result + np.sum(fine[done], axis=0)
        if np.all(done):
            return result
        keep = ~done
        a = np.concatenate([a[keep], mid[keep]])
        b = np.concatenate([mid[keep], b[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
        tol = np.concatenate([0.5 * tol[keep], 0.5 * tol[keep]])
    # depth cap reached: accept the remaining refined panels as they stand
    mid = 0.5 * (a + b)
    fine = integ.panels(a, mid, x, kernel) + integ.panels(mid, b, x, kernel)
    return result + np.sum(fine, axis=0)


def _near_threshold(curve):
    # open-curve node weights are only 4th order; widen their near band
    return (5.0 if curve.closed else 20.0) * curve.spacing


def _node_rule_velocity(curve, g, X):
    out = np.empty((len(X), 3))
    step = max(1, int(4e6 // max(curve.n, 1)))
    for lo in range(0, len(X), step):
        r = X[lo: lo + step, None, :] - curve.nodes[None, :, :]
        vals = oseen_apply(r, np.broadcast_to(g, r.shape))
        out[lo: lo + step] = np.einsum("n,mnd->md", curve.arc_weights, vals)
    return out


def _node_rule_pressure(curve, g, X):
    out = np.empty(len(X))
    step = max(1, int(4e6 // max(curve.n, 1)))
    for lo in range(0, len(X), step):
        r = X[lo: lo + step, None, :] - curve.nodes[None, :, :]
        vals = pressure_apply(r, np.broadcast_to(g, r.shape))
        out[lo: lo + step] = vals @ curve.arc_weights
    return out


def _check_not_on_curve(curve, x, dist):
    if dist < 1e-12 * curve.length:
        raise SingularPointError(
            f"evaluation point lies on the curve (dist={dist:.3e})"
        )


def _base_edges(curve):
    s = curve.arclengths
    return np.append(s, curve.length) if curve.closed else s


def line_velocity(curve, v, x):
    """Velocity 1/2 * integral of S(x-y) k(tau) v dH1 at a single point."""
    dens = v if isinstance(v, LineMeasureDensity) else density_from_field(curve, v)
    x = np.asarray(x, dtype=float).reshape(3)
    dist = float(_distance_to_polyline(curve, x[None, :])[0])
    _check_not_on_curve(curve, x, dist)
    if dist >= _near_threshold(curve):
        return _node_rule_velocity(curve, dens.density, x[None, :])[0]
    integ = _LineIntegrand(curve, dens.density)
    return _adaptive_integral(integ, x, oseen_apply, _base_edges(curve))


def line_pressure(curve, v, x):
    """Pressure counterpart with kernel P(x-y) . (k(tau) v / 2)."""
    dens = v if isinstance(v, LineMeasureDensity) else density_from_field(curve, v)
    x = np.asarray(x, dtype=float).reshape(3)
    dist = float(_distance_to_polyline(curve, x[None, :])[0])
    _check_not_on_curve(curve, x, dist)
    if dist >= _near_threshold(curve):
        return float(_node_rule_pressure(curve, dens.density, x[None, :])[0])
    integ = _LineIntegrand(curve, dens.density)
    return float(_adaptive_integral(integ, x, pressure_apply, _base_edges(curve)))


@dataclass(frozen=True)
class GridSpec:
    origin: np.ndarray
    spacing: float
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))
        object.__setattr__(self, "spacing", float(self.spacing))
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise PreconditionError("grid dims must be >= 1")
        object.__setattr__(self, "dims", dims)


def perturbation_field(state, flow, curves, grid, twists=None,
                       exclusion_factor=EXCLUSION_FACTOR):
    """Leading perturbation field of all bodies on a structured grid.

    The slip density of body i is v_i + w_i x (x - h_i) - u_flat evaluated
    on its placed centerline; twists default to the body twists stored in
    the state (the limit solution) and can be overridden.
    """
    if not isinstance(grid, GridSpec):
        grid = GridSpec(*grid)
    if twists is None:
        twists = []
        for b in state.bodies:
            if b.twist is None:
                from .dynamics import limit_rhs

                twists = limit_rhs(state, flow, curves)
                break
            twists.append(b.twist)
    nx, ny, nz = grid.dims
    shape = (nx, ny, nz)
    idx = np.stack(
        np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"),
        axis=-1,
    ).reshape(-1, 3)
    X = grid.origin + grid.spacing * idx.astype(float)

    velocity = np.zeros((len(X), 3))
    pressure = np.zeros(len(X))
    mask = np.zeros(len(X), dtype=bool)
    placed = state.placed(curves)
    for world, body, tw in zip(placed, state.bodies, twists):
        dens = density_from_twist(
            world, body.pose.translation, tw, flow=flow, t=state.time
        )
        dist = _distance_to_polyline(world, X)
        mask |= dist < exclusion_factor * world.spacing
        far = dist >= _near_threshold(world)
        if np.any(far):
            velocity[far] += _node_rule_velocity(world, dens.density, X[far])
            pressure[far] += _node_rule_pressure(world, dens.density, X[far])
        band = ~far & (dist >= 1e-12 * world.length)
        if np.any(band):
            integ = _LineIntegrand(world, dens.density)
            edges = _base_edges(world)
            for j in np.nonzero(band)[0]:
                velocity[j] += _adaptive_integral(integ, X[j], oseen_apply, edges)
                pressure[j] += _adaptive_integral(integ, X[j], pressure_apply, edges)
    velocity[mask] = 0.0
    pressure[mask] = 0.0
    return FieldGrid(
        origin=grid.origin,
        spacing=grid.spacing,
        dims=grid.dims,
        velocity=velocity.reshape(shape + (3,)),
        pressure=pressure.reshape(shape),
        mask=mask.reshape(shape),
    )


def divergence_check(grid):
    """Max central-difference divergence over usable points, scaled locally.

    The divergence is normalized by the local velocity-gradient magnitude;
    only unmasked interior points with all six unmasked neighbors count.
    """
    nx, ny, nz = grid.dims
    if min(nx, ny, nz) < 3:
        raise PreconditionError("divergence check needs at least a 3x3x3 grid")
    u = grid.velocity
    h = grid.spacing
    c = (slice(1, -1),) * 3

    def d(axis, comp):
        lo = [slice(1, -1)] * 3
        hi = [slice(1, -1)] * 3
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        return (u[tuple(hi) + (comp,)] - u[tuple(lo) + (comp,)]) / (2 * h)

    div = d(0, 0) + d(1, 1) + d(2, 2)
    grad_sq = np.zeros_like(div)
    for axis in range(3):
        for comp in range(3):
            grad_sq += d(axis, comp) ** 2
    grad = np.sqrt(grad_sq)

    usable = ~grid.mask[c]
    for axis in range(3):
        lo = [slice(1, -1)] * 3
        hi = [slice(1, -1)] * 3
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        usable &= ~grid.mask[tuple(lo)] & ~grid.mask[tuple(hi)]
    if not np.any(usable):
        raise PreconditionError("no usable interior points (grid fully masked)")
    gmax = float(np.max(grad[usable]))
    if gmax == 0.0:
        return 0.0
    scaled = np.abs(div[usable]) / np.maximum(grad[usable], 1e-12 * gmax)
    return float(np.max(scaled))


def near_field_log_law(curve, v, eps_list, n_samples=8):
    """Boundary-layer diagnostic: U at distance eps approaches |log eps| v.

    For each eps, evaluates the field at points offset by eps along normal
    directions at several arc positions and reports
    max |U(x_eps)/|log eps| - v|; the errors decay like 1/|log eps|.
    Requires a closed curve (open ends add endpoint log terms).
    """
    if not curve.closed:
        raise PreconditionError("near-field log law requires a closed curve")
    v = np.asarray(v, dtype=float).reshape(3)
    reach = 0.5 / max(curve.max_curvature, 1e-30)
    eps_list = [float(e) for e in eps_list]
    if max(eps_list) >= reach:
        raise PreconditionError(
            f"eps {max(eps_list):g} exceeds the tubular-neighborhood reach {reach:g}"
        )
    dens = density_from_field(curve, np.broadcast_to(v, (curve.n, 3)))
    spline = curve.spline
    svals = np.linspace(0.0, curve.length, n_samples, endpoint=False)
    rows = []
    for eps in sorted(eps_list, reverse=True):
        logf = abs(math.log(eps))
        worst = 0.0
        for s in svals:
            tau = spline(s, 1)
            tau = tau / np.linalg.norm(tau)
            ref = np.array([0.0, 0.0, 1.0])
            if abs(ref @ tau) > 0.9:
                ref = np.array([1.0, 0.0, 0.0])
            n1 = ref - (ref @ tau) * tau
            n1 /= np.linalg.norm(n1)
            n2 = np.cross(tau, n1)
            for direction in (n1, -n1, n2, -n2):
                x = spline(s) + eps * direction
                U = line_velocity(curve, dens, x)
                worst = max(worst, float(np.max(np.abs(U / logf - v))))
        rows.append({"eps": eps, "max_err": worst, "log_factor": logf})
    return rows


def fit_log_law(rows):
    """Least-squares constant C for err ~ C/|log eps|; returns (C, max rel dev)."""
    e = np.array([r["max_err"] for r in rows])
    L = np.array([r["log_factor"] for r in rows])
    C = float(np.sum(e / L) / np.sum(1.0 / L**2))
    model = C / L
    dev = float(np.max(np.abs(e - model) / model))
    return C, dev
