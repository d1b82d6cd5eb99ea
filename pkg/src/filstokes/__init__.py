"""Rigid filaments in steady Stokes flow: zero-thickness limit dynamics.

Renormalized resistance tensors and Faxen loads by line quadrature,
rigid-body ODE integration on SO(3), the singularly perturbed relaxation
model, and the leading-order perturbation flow field.
"""

__version__ = "0.1.0"

from .curves import (
    Curve,
    CrossSectionSpec,
    Pose,
    TwistVelocity,
    cutoff_centerline,
    curve_from_spec,
    min_distance,
    place,
    recenter,
    resample_arclength,
    rigid_velocity,
)
from .flows import BackgroundFlow, flow_from_spec
from .kernels import drag_matrix, oseen, pressure_kernel, s0
from .mobility import (
    InertiaSpec,
    ResistanceMatrix,
    Wrench,
    archimedes_load,
    conjugate_resistance,
    faxen_load,
    inertia_from_filament,
    line_pairing,
    resistance_matrix,
    solve_quasistatic,
)

__all__ = [
    "Curve",
    "CrossSectionSpec",
    "Pose",
    "TwistVelocity",
    "BackgroundFlow",
    "InertiaSpec",
    "ResistanceMatrix",
    "Wrench",
    "archimedes_load",
    "conjugate_resistance",
    "curve_from_spec",
    "cutoff_centerline",
    "drag_matrix",
    "faxen_load",
    "flow_from_spec",
    "inertia_from_filament",
    "line_pairing",
    "min_distance",
    "oseen",
    "place",
    "pressure_kernel",
    "recenter",
    "resample_arclength",
    "resistance_matrix",
    "rigid_velocity",
    "s0",
    "solve_quasistatic",
]
