"""Filament centerlines: resampling, placement, measurement, cross sections.

Curves are stored as uniform arc-length node lists with per-node unit
tangents and quadrature weights that sum to the total length.  Closed
curves use periodic indexing (the first node is not duplicated) and
periodic-trapezoid weights; open curves use 4th-order end-corrected
(Gregory) trapezoid weights on the same uniform nodes.
"""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import (
    DegenerateInputError,
    PreconditionError,
    StraightCurveError,
)
from .so3 import check_rotation

# relative curvature below this (times 1/L) counts as a straight line
STRAIGHT_CURVATURE_TOL = 1e-8


@dataclass(frozen=True)
class Pose:
    """Rigid placement: x -> translation + rotation @ x."""

    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float).reshape(3)
        Q = check_rotation(self.rotation)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", Q)

    @staticmethod
    def identity():
        return Pose(np.zeros(3), np.eye(3))


@dataclass(frozen=True)
class TwistVelocity:
    """Rigid velocity: linear part v and angular part omega."""

    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.linear, dtype=float).reshape(3)
        w = np.asarray(self.angular, dtype=float).reshape(3)
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise PreconditionError("twist components must be finite")
        object.__setattr__(self, "linear", v)
        object.__setattr__(self, "angular", w)

    @property
    def stacked(self):
        return np.concatenate([self.linear, self.angular])

    @staticmethod
    def from_stacked(y):
        y = np.asarray(y, dtype=float).reshape(6)
        return TwistVelocity(y[:3], y[3:])


@dataclass(frozen=True)
class Curve:
    """Discretized arc-length centerline.

    nodes: (n, 3) sample points, uniform in arc length
    tangents: (n, 3) unit tangents at the nodes
    arc_weights: (n,) positive quadrature weights summing to length
    length: total arc length
    closed: periodic indexing if True
    """

    nodes: np.ndarray
    tangents: np.ndarray
    arc_weights: np.ndarray
    length: float
    closed: bool

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float)
        tans = np.ascontiguousarray(self.tangents, dtype=float)
        w = np.ascontiguousarray(self.arc_weights, dtype=float)
        for arr in (nodes, tans, w):
            arr.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "tangents", tans)
        object.__setattr__(self, "arc_weights", w)
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "closed", bool(self.closed))

    @property
    def n(self):
        return self.nodes.shape[0]

    @property
    def spacing(self):
        """Arc-length spacing between consecutive nodes."""
        return self.length / self.n if self.closed else self.length / (self.n - 1)

    @property
    def arclengths(self):
        """Arc-length parameter of each node."""
        return np.arange(self.n) * self.spacing

    @cached_property
    def spline(self):
        """Arc-length cubic spline through the nodes (periodic if closed)."""
        s = self.arclengths
        if self.closed:
            s = np.append(s, self.length)
            pts = np.vstack([self.nodes, self.nodes[:1]])
            return CubicSpline(s, pts, axis=0, bc_type="periodic")
        return CubicSpline(s, self.nodes, axis=0)

    @cached_property
    def max_curvature(self):
        """Max |d tau / ds| over the nodes."""
        dtau = _differentiate(self.tangents, self.spacing, self.closed)
        return float(np.max(np.linalg.norm(dtau, axis=1)))

    def is_straight(self):
        return self.max_curvature <= STRAIGHT_CURVATURE_TOL / self.length

    def require_curved(self):
        if self.is_straight():
            raise StraightCurveError(
                "centerline is a straight line; the renormalized resistance "
                "matrix degenerates for segments"
            )

    def validate(self):
        """Check the structural invariants; raises on violation."""
        norms = np.linalg.norm(self.tangents, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise PreconditionError("tangents are not unit vectors")
        if abs(self.arc_weights.sum() - self.length) > 1e-10 * self.length:
            raise PreconditionError("arc weights do not sum to the length")
        if np.any(self.arc_weights <= 0):
            raise PreconditionError("arc weights must be positive")
        chords = np.linalg.norm(np.diff(_closed_nodes(self), axis=0), axis=1)
        mean = chords.mean()
        if np.max(np.abs(chords - mean)) > 0.01 * mean:
            raise PreconditionError("node spacing is not uniform within 1%")
        return self


def _closed_nodes(curve):
    """Node array with the wrap point appended for closed curves."""
    if curve.closed:
        return np.vstack([curve.nodes, curve.nodes[:1]])
    return curve.nodes


def _differentiate(values, h, closed):
    """d/ds of node samples: spectral for closed, 4th-order stencils for open."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if closed:
        L = n * h
        k = 2.0 * np.pi * np.fft.rfftfreq(n, d=L / n)
        vhat = np.fft.rfft(values, axis=0)
        if n % 2 == 0:
            # zero the Nyquist mode for an odd-order derivative
            vhat[-1] = 0.0
        return np.fft.irfft(1j * k[:, None] * vhat, n=n, axis=0)
    d = np.empty_like(values)
    # interior: 4th-order centered
    d[2:-2] = (values[:-4] - 8 * values[1:-3] + 8 * values[3:-1] - values[4:]) / (12 * h)
    # 4th-order one-sided stencils at the two first and last nodes
    c0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    c1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    d[0] = c0 @ values[:5] / h
    d[1] = c1 @ values[:5] / h
    d[-1] = -(c0 @ values[-1:-6:-1]) / h
    d[-2] = -(c1 @ values[-1:-6:-1]) / h
    return d


def _gregory4_weights(n, h):
    """End-corrected trapezoid weights, exact for cubics (O(h^4) error)."""
    w = np.full(n, h)
    ends = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0]) * h
    w[:3] = ends
    w[-3:] = ends[::-1]
    return w


def _evaluate_parametric(fn, ts):
    try:
        pts = np.asarray(fn(ts), dtype=float)
        if pts.shape == (len(ts), 3):
            return pts
        if pts.shape == (3, len(ts)):
            return pts.T
    except Exception:
        pass
    return np.array([fn(t) for t in ts], dtype=float)


def resample_arclength(samples, n, closed=False):
    """Resample an ordered point set or parametric function to uniform arc length.

    samples: (m, 3) array-like of ordered points, or a callable t -> point
        for t in [0, 1] (for closed curves the callable must be 1-periodic).
    n: number of output nodes (>= 8).
    closed: treat the curve as periodic.

    The length is the cumulative chord length refined by one round of spline
    re-integration.  Tangents come from spectral differences (closed) or
    4th-order stencils (open), normalized to unit length.
    """
    if n < 8:
        raise DegenerateInputError(f"need at least 8 nodes, got {n}")
    if callable(samples):
        m = max(4096, 8 * n)
        ts = np.linspace(0.0, 1.0, m, endpoint=not closed)
        pts = _evaluate_parametric(samples, ts)
    else:
        pts = np.asarray(samples, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise DegenerateInputError("samples must be an (m, 3) array")
        if closed and len(pts) > 1 and np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
    if len(pts) < 3:
        raise DegenerateInputError(f"need at least 3 input samples, got {len(pts)}")

    loop = np.vstack([pts, pts[:1]]) if closed else pts
    chords = np.linalg.norm(np.diff(loop, axis=0), axis=1)
    scale = np.max(np.abs(loop - loop.mean(axis=0))) or 1.0
    if np.any(chords < 1e-14 * scale):
        raise DegenerateInputError("repeated points (zero chord) in input samples")

    u = np.concatenate([[0.0], np.cumsum(chords)])
    if closed:
        spline = CubicSpline(u, loop, axis=0, bc_type="periodic")
    else:
        spline = CubicSpline(u, pts, axis=0)

    # re-integrate arc length on the spline: 8-point Gauss per fine interval
    fine = np.linspace(0.0, u[-1], 8 * (len(u) - 1) + 1)
    gx, gw = np.polynomial.legendre.leggauss(8)
    a, b = fine[:-1], fine[1:]
    half = 0.5 * (b - a)
    pts_g = spline(a[:, None] + half[:, None] * (gx[None, :] + 1.0), 1)
    speed = np.linalg.norm(pts_g, axis=-1)
    increments = half * (speed @ gw)
    s_fine = np.concatenate([[0.0], np.cumsum(increments)])
    length = float(s_fine[-1])

    # invert the monotone arc-length map and evaluate at uniform s
    inverse = PchipInterpolator(s_fine, fine)
    s_nodes = (
        np.arange(n) * (length / n) if closed else np.linspace(0.0, length, n)
    )
    nodes = spline(inverse(s_nodes))

    h = length / n if closed else length / (n - 1)
    tangents = _differentiate(nodes, h, closed)
    tangents /= np.linalg.norm(tangents, axis=1)[:, None]
    weights = np.full(n, h) if closed else _gregory4_weights(n, h)
    return Curve(nodes, tangents, weights, length, closed)


def recenter(curve):
    """Translate so the arc-length barycenter sits at the origin.

    Returns (centered curve, removed offset).
    """
    offset = curve.arc_weights @ curve.nodes / curve.length
    moved = Curve(
        curve.nodes - offset,
        curve.tangents,
        curve.arc_weights,
        curve.length,
        curve.closed,
    )
    return moved, offset


def place(curve, pose):
    """Apply a rigid placement: nodes -> h + Q x, tangents -> Q tau."""
    if not isinstance(pose, Pose):
        pose = Pose(*pose)
    Q, h = pose.rotation, pose.translation
    return Curve(
        curve.nodes @ Q.T + h,
        curve.tangents @ Q.T,
        curve.arc_weights,
        curve.length,
        curve.closed,
    )


def _segment_endpoints(curve):
    pts = _closed_nodes(curve)
    return pts[:-1], pts[1:]


def _segment_pair_distance(P0, P1, Q0, Q1):
    """Vectorized minimum distance between segment pairs (broadcast shapes)."""
    d1 = P1 - P0
    d2 = Q1 - Q0
    r = P0 - Q0
    a = np.einsum("...i,...i->...", d1, d1)
    e = np.einsum("...i,...i->...", d2, d2)
    b = np.einsum("...i,...i->...", d1, d2)
    c = np.einsum("...i,...i->...", d1, r)
    f = np.einsum("...i,...i->...", d2, r)
    denom = a * e - b * b
    s = np.where(denom > 0, np.clip((b * f - c * e) / np.where(denom > 0, denom, 1.0), 0, 1), 0.0)
    t = np.where(e > 0, (b * s + f) / np.where(e > 0, e, 1.0), 0.0)
    t_cl = np.clip(t, 0.0, 1.0)
    # re-clamp s where t was clamped
    s = np.where(
        t != t_cl,
        np.clip((b * t_cl - c) / np.where(a > 0, a, 1.0), 0.0, 1.0),
        s,
    )
    closest = P0 + s[..., None] * d1 - (Q0 + t_cl[..., None] * d2)
    return np.sqrt(np.einsum("...i,...i->...", closest, closest))


def min_distance(a, b):
    """Minimum distance between two polyline curves (exact segment-segment).

    A midpoint/radius prefilter culls far segment pairs before the exact
    computation; node-node distances alone would underestimate by O(h^2).
    """
    P0, P1 = _segment_endpoints(a)
    Q0, Q1 = _segment_endpoints(b)
    mid_a, rad_a = 0.5 * (P0 + P1), 0.5 * np.linalg.norm(P1 - P0, axis=1)
    mid_b, rad_b = 0.5 * (Q0 + Q1), 0.5 * np.linalg.norm(Q1 - Q0, axis=1)
    gap = np.linalg.norm(mid_a[:, None, :] - mid_b[None, :, :], axis=-1)
    lower = gap - rad_a[:, None] - rad_b[None, :]
    best_upper = float(np.min(gap + rad_a[:, None] + rad_b[None, :]))
    ia, ib = np.nonzero(lower <= best_upper)
    d = _segment_pair_distance(P0[ia], P1[ia], Q0[ib], Q1[ib])
    return float(np.min(d))


def cutoff_centerline(curve, eps):
    """Trim an eps layer from both ends of an open curve; closed curves pass through."""
    eps = float(eps)
    if eps < 0:
        raise DegenerateInputError("cutoff layer must be nonnegative")
    if eps == 0.0 or curve.closed:
        return curve
    if 2 * eps >= curve.length:
        raise DegenerateInputError(
            f"cutoff layer eps={eps:g} >= half the curve length {curve.length / 2:g}"
        )
    spline = curve.spline
    lo, span = eps, curve.length - 2 * eps
    return resample_arclength(lambda t: spline(lo + t * span), curve.n, closed=False)


def rigid_velocity(alpha, pose_center, x):
    """Elementary rigid velocity field number alpha (1..6) about pose_center."""
    if alpha not in (1, 2, 3, 4, 5, 6):
        raise ValueError(f"alpha must be in 1..6, got {alpha}")
    x = np.asarray(x, dtype=float)
    e = np.zeros(3)
    if alpha <= 3:
        e[alpha - 1] = 1.0
        return np.broadcast_to(e, x.shape).copy() if x.ndim > 1 else e
    e[alpha - 4] = 1.0
    return np.cross(e, x - np.asarray(pose_center, dtype=float))


def rigid_velocity_fields(nodes, center):
    """All six elementary rigid fields at the given points; shape (6, n, 3)."""
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.shape[0]
    fields = np.zeros((6, n, 3))
    for a in range(3):
        fields[a, :, a] = 1.0
    rel = nodes - np.asarray(center, dtype=float)
    for a in range(3):
        e = np.zeros(3)
        e[a] = 1.0
        fields[3 + a] = np.cross(e, rel)
    return fields


def twist_field(nodes, center, twist):
    """v + omega x (x - center) evaluated at the points."""
    nodes = np.asarray(nodes, dtype=float)
    return twist.linear + np.cross(twist.angular, nodes - np.asarray(center, float))


@dataclass(frozen=True)
class CrossSectionSpec:
    """Cross-section metadata: frame R(s) with R e3 = tau, planar shape, thickness.

    area(s) is the area of the unit-scale section image; the physical section
    is eps * shape, so physical area carries an explicit eps^2.
    """

    frame: object
    shape: object
    thickness: float
    area: object

    def __post_init__(self):
        eps = float(self.thickness)
        if not 0.0 < eps < 1.0:
            raise PreconditionError(f"thickness must lie in (0, 1), got {eps}")
        object.__setattr__(self, "thickness", eps)


def _frames_along(curve):
    """Rotation-minimizing frames at the nodes via the double-reflection method."""
    tau = curve.tangents
    n = curve.n
    frames = np.empty((n, 3, 3))
    ref = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(ref, tau[0])) > 0.9:
        ref = np.array([1.0, 0.0, 0.0])
    u = ref - np.dot(ref, tau[0]) * tau[0]
    u /= np.linalg.norm(u)
    for i in range(n):
        if i > 0:
            # double reflection transporting u along the polyline
            v1 = curve.nodes[i] - curve.nodes[i - 1]
            c1 = v1 @ v1
            uL = u - (2.0 * (v1 @ u) / c1) * v1
            tL = tau[i - 1] - (2.0 * (v1 @ tau[i - 1]) / c1) * v1
            v2 = tau[i] - tL
            c2 = v2 @ v2
            u = uL if c2 < 1e-30 else uL - (2.0 * (v2 @ uL) / c2) * v2
            u -= np.dot(u, tau[i]) * tau[i]
            u /= np.linalg.norm(u)
        frames[i, :, 0] = u
        frames[i, :, 1] = np.cross(tau[i], u)
        frames[i, :, 2] = tau[i]
    return frames


def circular_cross_section(curve, radius=1.0, thickness=0.01):
    """Disc cross section of the given unit-scale radius along the curve."""
    radius = float(radius)
    if radius <= 0:
        raise PreconditionError("cross-section radius must be positive")
    frames = _frames_along(curve)
    s_nodes = curve.arclengths
    area = np.pi * radius**2

    def frame(s):
        i = int(np.argmin(np.abs(s_nodes - (s % curve.length))))
        return frames[i]

    return CrossSectionSpec(
        frame=frame,
        shape=lambda s, p: radius * np.asarray(p, dtype=float),
        thickness=thickness,
        area=lambda s: area,
    )


# -- parametric presets -------------------------------------------------------

def _circle(radius=1.0):
    r = float(radius)
    return lambda t: np.stack(
        [r * np.cos(2 * np.pi * t), r * np.sin(2 * np.pi * t), np.zeros_like(t)],
        axis=-1,
    )


def _ellipse(a=1.0, b=0.5):
    return lambda t: np.stack(
        [a * np.cos(2 * np.pi * t), b * np.sin(2 * np.pi * t), np.zeros_like(t)],
        axis=-1,
    )


def _trefoil(scale=1.0):
    def fn(t):
        th = 2 * np.pi * t
        return scale * np.stack(
            [
                np.sin(th) + 2 * np.sin(2 * th),
                np.cos(th) - 2 * np.cos(2 * th),
                -np.sin(3 * th),
            ],
            axis=-1,
        )

    return fn


def _helix_arc(radius=1.0, pitch=0.3, turns=1.5):
    def fn(t):
        th = 2 * np.pi * turns * t
        return np.stack(
            [radius * np.cos(th), radius * np.sin(th), pitch * th / (2 * np.pi)],
            axis=-1,
        )

    return fn


PRESETS = {
    "circle": (_circle, True),
    "ellipse": (_ellipse, True),
    "trefoil": (_trefoil, True),
    "helix_arc": (_helix_arc, False),
}


def curve_from_spec(spec, default_nodes=256):
    """Build a Curve from a JSON-style dict: a preset, raw samples, or a file.

    A {"file": path} entry loads the referenced JSON curve file; inline keys
    (e.g. nodes) override the file's values.
    """
    if not isinstance(spec, dict):
        raise DegenerateInputError("curve spec must be a mapping")
    if "file" in spec:
        with open(spec["file"]) as fh:
            loaded = json.load(fh)
        loaded.update({k: v for k, v in spec.items() if k != "file"})
        spec = loaded
    n = int(spec.get("nodes", default_nodes))
    if "preset" in spec:
        name = spec["preset"]
        if name not in PRESETS:
            raise DegenerateInputError(
                f"unknown curve preset {name!r}; have {sorted(PRESETS)}"
            )
        factory, closed = PRESETS[name]
        params = spec.get("params", {})
        return resample_arclength(factory(**params), n, closed=closed)
    if "samples" in spec:
        closed = bool(spec.get("closed", False))
        return resample_arclength(np.asarray(spec["samples"], dtype=float), n, closed=closed)
    raise DegenerateInputError("curve spec needs either 'preset' or 'samples'")


def load_curve(path, default_nodes=256):
    """Load a curve from a JSON file holding a curve spec."""
    with open(path) as fh:
        return curve_from_spec(json.load(fh), default_nodes=default_nodes)
