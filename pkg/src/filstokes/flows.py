"""Analytic divergence-free background flows with exact derivatives.

Each flow provides the velocity together with its gradient, Laplacian and
pressure gradient as closed-form maps, so the Faxen and Archimedes loads
never rely on numerical differentiation.  All maps are vectorized over a
trailing (..., 3) point axis and re-entrant.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PreconditionError


@dataclass(frozen=True)
class BackgroundFlow:
    """Smooth background flow (u_flat, p_flat) given through analytic maps.

    velocity, laplacian, pressure_gradient: (t, x) -> (..., 3)
    gradient: (t, x) -> (..., 3, 3) with gradient[..., i, j] = d_j u_i
    """

    velocity: object
    gradient: object
    laplacian: object
    pressure_gradient: object
    name: str = "custom"

    def forcing(self, t, x):
        """Delta u_flat + grad p_flat, the Archimedes load density."""
        return self.laplacian(t, x) + self.pressure_gradient(t, x)

    def check_divergence_free(self, points, t=0.0, tol=1e-10):
        """Verify trace(grad u) = 0 at the sampled points."""
        g = self.gradient(t, np.asarray(points, dtype=float))
        div = np.trace(g, axis1=-2, axis2=-1)
        worst = float(np.max(np.abs(div)))
        if worst > tol:
            raise PreconditionError(
                f"background flow {self.name!r} is not divergence-free: "
                f"max |div u| = {worst:.3e}"
            )
        return worst


def _zeros_like_points(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _zeros_grad(x):
    x = np.asarray(x, dtype=float)
    return np.zeros(x.shape[:-1] + (3, 3))


def constant_flow(U):
    U = np.asarray(U, dtype=float).reshape(3)

    def velocity(t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(U, x.shape).copy()

    return BackgroundFlow(
        velocity=velocity,
        gradient=lambda t, x: _zeros_grad(x),
        laplacian=lambda t, x: _zeros_like_points(x),
        pressure_gradient=lambda t, x: _zeros_like_points(x),
        name="constant",
    )


def shear_flow(rate=1.0):
    """u = (rate * x2, 0, 0), the standard simple shear."""
    rate = float(rate)
    G = np.zeros((3, 3))
    G[0, 1] = rate

    def velocity(t, x):
        x = np.asarray(x, dtype=float)
        u = np.zeros_like(x)
        u[..., 0] = rate * x[..., 1]
        return u

    def gradient(t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(G, x.shape[:-1] + (3, 3)).copy()

    return BackgroundFlow(
        velocity=velocity,
        gradient=gradient,
        laplacian=lambda t, x: _zeros_like_points(x),
        pressure_gradient=lambda t, x: _zeros_like_points(x),
        name="shear",
    )


def rigid_vortex_flow(omega):
    """u = omega x x, a rigid rotation about the origin."""
    w = np.asarray(omega, dtype=float).reshape(3)
    G = np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])

    def velocity(t, x):
        x = np.asarray(x, dtype=float)
        return np.cross(w, x)

    def gradient(t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(G, x.shape[:-1] + (3, 3)).copy()

    return BackgroundFlow(
        velocity=velocity,
        gradient=gradient,
        laplacian=lambda t, x: _zeros_like_points(x),
        pressure_gradient=lambda t, x: _zeros_like_points(x),
        name="vortex",
    )


def taylor_green_flow(amplitude=1.0, wavenumber=1.0):
    """Trigonometric cell u = A (sin kx cos ky cos kz, -cos kx sin ky cos kz, 0)."""
    A = float(amplitude)
    k = float(wavenumber)

    def velocity(t, x):
        x = np.asarray(x, dtype=float)
        cx, cy, cz = np.cos(k * x[..., 0]), np.cos(k * x[..., 1]), np.cos(k * x[..., 2])
        sx, sy = np.sin(k * x[..., 0]), np.sin(k * x[..., 1])
        u = np.zeros_like(x)
        u[..., 0] = A * sx * cy * cz
        u[..., 1] = -A * cx * sy * cz
        return u

    def gradient(t, x):
        x = np.asarray(x, dtype=float)
        cx, cy, cz = np.cos(k * x[..., 0]), np.cos(k * x[..., 1]), np.cos(k * x[..., 2])
        sx, sy, sz = np.sin(k * x[..., 0]), np.sin(k * x[..., 1]), np.sin(k * x[..., 2])
        g = np.zeros(x.shape[:-1] + (3, 3))
        g[..., 0, 0] = A * k * cx * cy * cz
        g[..., 0, 1] = -A * k * sx * sy * cz
        g[..., 0, 2] = -A * k * sx * cy * sz
        g[..., 1, 0] = A * k * sx * sy * cz
        g[..., 1, 1] = -A * k * cx * cy * cz
        g[..., 1, 2] = A * k * cx * sy * sz
        return g

    def laplacian(t, x):
        return -3.0 * k * k * velocity(t, x)

    return BackgroundFlow(
        velocity=velocity,
        gradient=gradient,
        laplacian=laplacian,
        pressure_gradient=lambda t, x: _zeros_like_points(x),
        name="taylor_green",
    )


_CATALOG = {
    "constant": (constant_flow, {"U": (0.0, 0.0, 0.0)}),
    "shear": (shear_flow, {"rate": 1.0}),
    "vortex": (rigid_vortex_flow, {"omega": (0.0, 0.0, 1.0)}),
    "taylor_green": (taylor_green_flow, {"amplitude": 1.0, "wavenumber": 1.0}),
}


def flow_from_spec(spec):
    """Build a catalog flow from {'name': ..., <params>}."""
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError("flow spec must be a mapping with a 'name' key")
    name = spec["name"]
    if name not in _CATALOG:
        raise ConfigError(f"unknown flow {name!r}; have {sorted(_CATALOG)}")
    factory, defaults = _CATALOG[name]
    params = {k: spec.get(k, v) for k, v in defaults.items()}
    extra = set(spec) - set(defaults) - {"name"}
    if extra:
        raise ConfigError(f"unknown parameters {sorted(extra)} for flow {name!r}")
    return factory(**params)
