"""Stokeslet, pressure kernel, and the anisotropic local drag matrices.

All kernels are exact algebraic expressions; evaluation at the singular
point is an error, never an extrapolation.
"""

import numpy as np

from .errors import PreconditionError, SingularPointError

_UNIT_TOL = 1e-10
FOUR_PI = 4.0 * np.pi
EIGHT_PI = 8.0 * np.pi


def oseen(x):
    """Stokeslet matrix S(x) = (Id + x_hat x_hat^T) / (8 pi |x|)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x)
    if r == 0.0:
        raise SingularPointError("Stokeslet evaluated at x = 0")
    p = x / r
    return (np.eye(3) + np.outer(p, p)) / (EIGHT_PI * r)


def pressure_kernel(x):
    """Pressure kernel P(x) = x / (4 pi |x|^3)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x)
    if r == 0.0:
        raise SingularPointError("pressure kernel evaluated at x = 0")
    return x / (FOUR_PI * r**3)


def drag_matrix(p):
    """Local drag matrix k(p) = 8 pi (Id - p p^T / 2); defined for all p."""
    p = np.asarray(p, dtype=float)
    return EIGHT_PI * (np.eye(3) - 0.5 * np.outer(p, p))


def s0(p):
    """Unit-sphere Stokeslet factor S0(p) = (Id + p p^T) / (8 pi); |p| = 1 required."""
    p = np.asarray(p, dtype=float)
    n = np.linalg.norm(p)
    if abs(n - 1.0) > _UNIT_TOL:
        raise PreconditionError(f"s0 requires a unit vector, got |p| = {n:.12g}")
    return (np.eye(3) + np.outer(p, p)) / EIGHT_PI


# -- vectorized variants used by the quadrature modules ----------------------

def oseen_apply(r, g):
    """Apply the Stokeslet to densities: sum_k S(r_k) g_k stays with the caller.

    r: (..., 3) offsets, g: (..., 3) densities; returns (..., 3) values
    S(r_k) g_k elementwise over the leading axes. No singular-point guard;
    callers must exclude r = 0.
    """
    r = np.asarray(r, dtype=float)
    g = np.asarray(g, dtype=float)
    d = np.linalg.norm(r, axis=-1)
    rg = np.einsum("...i,...i->...", r, g)
    return (g + r * (rg / d**2)[..., None]) / (EIGHT_PI * d[..., None])


def pressure_apply(r, g):
    """P(r_k) . g_k over the leading axes; callers exclude r = 0."""
    r = np.asarray(r, dtype=float)
    g = np.asarray(g, dtype=float)
    d = np.linalg.norm(r, axis=-1)
    return np.einsum("...i,...i->...", r, g) / (FOUR_PI * d**3)


def drag_apply(tau, v):
    """k(tau_k) v_k = 8 pi (v_k - tau_k (tau_k . v_k) / 2) over the leading axes."""
    tau = np.asarray(tau, dtype=float)
    v = np.asarray(v, dtype=float)
    tv = np.einsum("...i,...i->...", tau, v)
    return EIGHT_PI * (v - 0.5 * tau * tv[..., None])
