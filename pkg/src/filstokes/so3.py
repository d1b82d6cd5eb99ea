"""Small helpers for rotations: hat map, Rodrigues exponential, polar projection."""

import numpy as np

from .errors import InvalidPoseError

_ORTHO_TOL = 1e-10


def hat(w):
    """Skew-symmetric matrix of the cross product, hat(w) @ x == w x x."""
    w = np.asarray(w, dtype=float)
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def exp_so3(w):
    """Rodrigues rotation exponential of the rotation vector w."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w)
    K = hat(w)
    if theta < 1e-8:
        # 2nd-order series; error ~ theta^4 stays below machine precision here
        return np.eye(3) + K + 0.5 * (K @ K)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def dexpinv_so3(u, v):
    """Inverse right-trivialized differential of exp on so(3), truncated.

    Returns v - 1/2 [u,v] + 1/12 [u,[u,v]], enough commutators for a
    4th-order Munthe-Kaas integrator.
    """
    uv = np.cross(u, v)
    return v - 0.5 * uv + np.cross(u, uv) / 12.0


def polar_project(Q):
    """Nearest rotation matrix in Frobenius norm (polar factor via SVD)."""
    U, _, Vt = np.linalg.svd(np.asarray(Q, dtype=float))
    R = U @ Vt
    if np.linalg.det(R) < 0:
        R = U @ np.diag([1.0, 1.0, -1.0]) @ Vt
    return R


def check_rotation(Q, tol=_ORTHO_TOL):
    """Raise InvalidPoseError unless Q is orthogonal with det +1 within tol."""
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (3, 3):
        raise InvalidPoseError(f"rotation must be 3x3, got shape {Q.shape}")
    err = np.max(np.abs(Q.T @ Q - np.eye(3)))
    if err > tol:
        raise InvalidPoseError(f"Q^T Q deviates from identity by {err:.3e} > {tol:.1e}")
    det = np.linalg.det(Q)
    if abs(det - 1.0) > tol:
        raise InvalidPoseError(f"det Q = {det:.12f} is not +1 within {tol:.1e}")
    return Q


def rotation_from_quaternion(q):
    """Rotation matrix from a quaternion (w, x, y, z); normalizes first."""
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise InvalidPoseError("quaternion must have 4 components (w, x, y, z)")
    n = np.linalg.norm(q)
    if n == 0.0:
        raise InvalidPoseError("zero quaternion")
    w, x, y, z = q / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rotation_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise InvalidPoseError("zero rotation axis")
    return exp_so3(axis / n * float(angle))


def random_rotation(rng):
    """Haar-ish random rotation from a normalized random quaternion."""
    q = rng.standard_normal(4)
    return rotation_from_quaternion(q)
