"""Exception types shared across the package."""


class FilStokesError(Exception):
    """Base class for all filstokes errors."""


class DegenerateInputError(FilStokesError, ValueError):
    """Input geometry is degenerate (too few points, repeated points, empty range)."""


class StraightCurveError(FilStokesError, ValueError):
    """Centerline is a straight line; the renormalized resistance degenerates."""


class InvalidPoseError(FilStokesError, ValueError):
    """Rotation matrix is not orthogonal with determinant +1."""


class SingularPointError(FilStokesError, ValueError):
    """Kernel or line integral evaluated at a singular point."""


class PreconditionError(FilStokesError, ValueError):
    """An operation precondition was violated."""


class IllConditionedError(FilStokesError, RuntimeError):
    """Linear system too ill-conditioned to solve reliably."""


class ConfigError(FilStokesError, ValueError):
    """Invalid or inconsistent run configuration."""


class CollisionHalt(FilStokesError):
    """Raised when the minimum centerline distance drops to the collision threshold.

    Carries the numerical first-collision time and the offending distance.
    """

    def __init__(self, time, d_min, threshold):
        self.time = float(time)
        self.d_min = float(d_min)
        self.threshold = float(threshold)
        super().__init__(
            f"collision at t={self.time:.6g}: d_min={self.d_min:.6g} <= "
            f"threshold={self.threshold:.6g}"
        )
