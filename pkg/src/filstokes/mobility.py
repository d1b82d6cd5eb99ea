"""Renormalized resistance matrices, Faxen loads, inertia, quasi-static balance.

Everything here is a line quadrature over centerline nodes: the pairing
functional is 1/2 * integral of k(tau) v . w along the curve, evaluated
with the curve's stored arc weights (periodic trapezoid for closed
curves, 4th-order end-corrected weights for open ones).  The integrands
are smooth, so no kernel singularity ever enters.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .curves import TwistVelocity, rigid_velocity_fields
from .errors import IllConditionedError, PreconditionError
from .kernels import EIGHT_PI, drag_apply
from .so3 import check_rotation

CONDITION_LIMIT = 1e12
_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ResistanceMatrix:
    """6x6 renormalized resistance; blocks (vv, vw; wv, ww) in world frame."""

    entries: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.entries, dtype=float)
        if A.shape != (6, 6):
            raise PreconditionError(f"resistance matrix must be 6x6, got {A.shape}")
        A = 0.5 * (A + A.T)
        A.flags.writeable = False
        object.__setattr__(self, "entries", A)

    @property
    def translation_block(self):
        return self.entries[:3, :3]

    @property
    def rotation_block(self):
        return self.entries[3:, 3:]

    @property
    def coupling_block(self):
        return self.entries[:3, 3:]

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True)
class Wrench:
    """Force and torque pair."""

    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.force, dtype=float).reshape(3)
        tq = np.asarray(self.torque, dtype=float).reshape(3)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(tq))):
            raise PreconditionError("wrench components must be finite")
        object.__setattr__(self, "force", f)
        object.__setattr__(self, "torque", tq)

    @property
    def stacked(self):
        return np.concatenate([self.force, self.torque])

    @staticmethod
    def from_stacked(y):
        y = np.asarray(y, dtype=float).reshape(6)
        return Wrench(y[:3], y[3:])


@dataclass(frozen=True)
class InertiaSpec:
    """Thickness-scaled inertia: mass / eps^2 and body-frame inertia / eps^2."""

    mass_scaled: float
    inertia_body: np.ndarray

    def __post_init__(self):
        m = float(self.mass_scaled)
        J = np.asarray(self.inertia_body, dtype=float)
        if m <= 0:
            raise PreconditionError("scaled mass must be positive")
        J = 0.5 * (J + J.T)
        if np.min(np.linalg.eigvalsh(J)) <= 0:
            raise PreconditionError("inertia matrix must be positive definite")
        J.flags.writeable = False
        object.__setattr__(self, "mass_scaled", m)
        object.__setattr__(self, "inertia_body", J)


def line_pairing(curve, v, w):
    """Pairing functional 1/2 * integral of k(tau) v . w over the curve.

    v, w: (n, 3) fields sampled at the curve nodes.  Bilinear and symmetric.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != (curve.n, 3) or w.shape != (curve.n, 3):
        raise PreconditionError(
            f"fields must be sampled at the {curve.n} curve nodes"
        )
    tau = curve.tangents
    vw = np.einsum("nd,nd->n", v, w)
    tv = np.einsum("nd,nd->n", tau, v)
    tw = np.einsum("nd,nd->n", tau, w)
    return 0.5 * EIGHT_PI * float(curve.arc_weights @ (vw - 0.5 * tv * tw))


def resistance_matrix(curve, center):
    """Assemble the 6x6 resistance K_hat about the given center.

    Entries K[a, b] pair the elementary rigid velocity fields; the matrix is
    symmetric positive definite for every non-straight curve.
    """
    curve.require_curved()
    fields = rigid_velocity_fields(curve.nodes, center)
    tau = curve.tangents
    w = curve.arc_weights
    proj = np.einsum("and,nd->an", fields, tau)
    K = 0.5 * EIGHT_PI * (
        np.einsum("and,bnd,n->ab", fields, fields, w)
        - 0.5 * np.einsum("an,bn,n->ab", proj, proj, w)
    )
    return ResistanceMatrix(K)


def conjugate_resistance(body_frame, Q):
    """Push a body-frame resistance to world frame: blockdiag(Q, Q) K blockdiag(Q, Q)^T."""
    Q = check_rotation(Q)
    B = np.zeros((6, 6))
    B[:3, :3] = Q
    B[3:, 3:] = Q
    return ResistanceMatrix(B @ body_frame.entries @ B.T)


def faxen_load(curve, center, flow, t=0.0):
    """Faxen force and torque of the background flow on the centerline."""
    u = flow.velocity(t, curve.nodes)
    ku = drag_apply(curve.tangents, u)
    fields = rigid_velocity_fields(curve.nodes, center)
    loads = 0.5 * np.einsum("and,nd,n->a", fields, ku, curve.arc_weights)
    return Wrench(loads[:3], loads[3:])


def solve_quasistatic(K, load):
    """Solve K (v, w) = load by SPD factorization with a residual check."""
    A = K.entries
    f = load.stacked
    eigs = np.linalg.eigvalsh(A)
    if eigs[0] <= 0:
        raise PreconditionError(
            f"resistance matrix is not positive definite (min eig {eigs[0]:.3e})"
        )
    cond = eigs[-1] / eigs[0]
    if cond > CONDITION_LIMIT:
        raise IllConditionedError(
            f"resistance matrix condition number {cond:.3e} exceeds "
            f"{CONDITION_LIMIT:.0e} (near-straight curve?)"
        )
    factor = cho_factor(A, lower=True)
    y = cho_solve(factor, f)
    fnorm = np.linalg.norm(f)
    if fnorm > 0:
        resid = np.linalg.norm(A @ y - f)
        if resid > _RESIDUAL_TOL * fnorm:
            y = y + cho_solve(factor, f - A @ y)
            resid = np.linalg.norm(A @ y - f)
            if resid > _RESIDUAL_TOL * fnorm:
                raise IllConditionedError(
                    f"quasi-static solve residual {resid:.3e} exceeds "
                    f"{_RESIDUAL_TOL:.0e} * |f|"
                )
    return TwistVelocity(y[:3], y[3:])


def _section_areas(curve, xsec):
    return np.array([xsec.area(s) for s in curve.arclengths], dtype=float)


def inertia_from_filament(curve, xsec, density):
    """Scaled mass and inertia at thin-rod leading order.

    mass/eps^2 = density * integral of area(s) ds; inertia/eps^2 uses the
    centerline second moments about the mass barycenter.  Cross-section
    second moments are O(eps^2) relative and dropped.
    """
    density = float(density)
    if density <= 0:
        raise PreconditionError("density must be positive")
    areas = _section_areas(curve, xsec)
    lineal = curve.arc_weights * areas
    mass = density * float(lineal.sum())
    if mass <= 0:
        raise PreconditionError("cross section has zero area")
    center = lineal @ curve.nodes / lineal.sum()
    rel = curve.nodes - center
    r2 = np.einsum("nd,nd->n", rel, rel)
    J = density * (
        np.eye(3) * float(lineal @ r2)
        - np.einsum("n,nd,ne->de", lineal, rel, rel)
    )
    return InertiaSpec(mass, J)


def archimedes_load(curve, xsec, flow, center, t=0.0):
    """Leading-order Archimedes wrench, explicitly O(eps^2).

    Collapses the volume integral of (Delta u_flat + grad p_flat) to the
    centerline times the local cross-section area.
    """
    eps2 = xsec.thickness**2
    areas = _section_areas(curve, xsec)
    forcing = flow.forcing(t, curve.nodes)
    lineal = curve.arc_weights * areas
    force = eps2 * np.einsum("n,nd->d", lineal, forcing)
    rel = curve.nodes - np.asarray(center, dtype=float)
    torque = eps2 * np.einsum("n,nd->d", lineal, np.cross(rel, forcing))
    return Wrench(force, torque)


def coercivity_gap(curve, center, K, twist):
    """(v,w)^T K (v,w) minus 2 pi * integral |v + w x (x-center)|^2; >= 0 in theory."""
    y = twist.stacked if isinstance(twist, TwistVelocity) else np.asarray(twist, float)
    field = y[:3] + np.cross(y[3:], curve.nodes - np.asarray(center, float))
    quad = float(curve.arc_weights @ np.einsum("nd,nd->n", field, field))
    return float(y @ K.entries @ y) - 2.0 * np.pi * quad
