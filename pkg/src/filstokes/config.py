"""Run configuration: JSON schema, validation, and scene assembly.

A config is one JSON object; see README for the schema.  Validation errors
name the offending key path, and JSON syntax errors carry the line/column
from the parser.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .curves import (
    Pose,
    TwistVelocity,
    circular_cross_section,
    curve_from_spec,
    recenter,
)
from .dynamics import default_collision_threshold
from .errors import ConfigError
from .flows import flow_from_spec
from .mobility import inertia_from_filament
from .so3 import check_rotation, rotation_from_axis_angle, rotation_from_quaternion

_MODELS = ("limit", "relaxation")


@dataclass
class SimConfig:
    curves: list
    poses: list
    flow: dict
    model: str = "limit"
    eps: float = None
    initial_twists: list = None
    T: float = 1.0
    dt: float = None
    nodes: int = 256
    collision_threshold: float = None
    outputs: dict = field(default_factory=dict)
    grid: dict = None
    seed: int = 0
    density: float = 1.0
    section_radius: float = 1.0
    raw: dict = field(default_factory=dict)

    def resolved_dt(self):
        return self.dt if self.dt is not None else self.T / 1000.0


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def parse_config(data, source="<config>"):
    """Validate a raw dict into a SimConfig; errors name the key path."""
    _require(isinstance(data, dict), f"{source}: config must be a JSON object")
    unknown = set(data) - {
        "curves", "poses", "flow", "model", "eps", "initial_twists", "T",
        "dt", "nodes", "collision_threshold", "outputs", "grid", "seed",
        "density", "section_radius",
    }
    _require(not unknown, f"{source}: unknown keys {sorted(unknown)}")

    curves = data.get("curves")
    _require(isinstance(curves, list) and curves, f"{source}: 'curves' must be a non-empty list")
    model = data.get("model", "limit")
    _require(model in _MODELS, f"{source}: 'model' must be one of {_MODELS}")
    flow = data.get("flow")
    _require(isinstance(flow, dict), f"{source}: 'flow' must be an object")

    poses = data.get("poses")
    if poses is None:
        poses = [{} for _ in curves]
    _require(isinstance(poses, list), f"{source}: 'poses' must be a list")
    _require(
        len(poses) == len(curves),
        f"{source}: 'poses' has {len(poses)} entries for {len(curves)} curves",
    )

    T = float(data.get("T", 1.0))
    _require(T > 0, f"{source}: 'T' must be positive")
    dt = data.get("dt")
    if dt is not None:
        dt = float(dt)
        _require(dt > 0, f"{source}: 'dt' must be positive")

    eps = data.get("eps")
    if model == "relaxation":
        _require(eps is not None, f"{source}: 'eps' is required for the relaxation model")
        eps = float(eps)
        _require(0.0 < eps < 1.0, f"{source}: 'eps' must lie in (0, 1)")
    elif eps is not None:
        eps = float(eps)

    twists = data.get("initial_twists")
    if twists is not None:
        _require(model == "relaxation",
                 f"{source}: 'initial_twists' only apply to the relaxation model")
        _require(
            isinstance(twists, list) and len(twists) == len(curves),
            f"{source}: 'initial_twists' must list one twist per body",
        )

    nodes = int(data.get("nodes", 256))
    _require(nodes >= 8, f"{source}: 'nodes' must be >= 8")

    grid = data.get("grid")
    if grid is not None:
        _require(isinstance(grid, dict), f"{source}: 'grid' must be an object")
        dims = grid.get("dims", [16, 16, 16])
        dims = [dims] * 3 if isinstance(dims, int) else list(dims)
        _require(
            len(dims) == 3 and all(int(d) >= 1 for d in dims),
            f"{source}: 'grid.dims' must be three integers >= 1",
        )
        _require(float(grid.get("spacing", 0.1)) > 0, f"{source}: 'grid.spacing' must be positive")

    ct = data.get("collision_threshold")
    if ct is not None:
        ct = float(ct)
        _require(ct >= 0, f"{source}: 'collision_threshold' must be nonnegative")

    density = float(data.get("density", 1.0))
    _require(density > 0, f"{source}: 'density' must be positive")
    section_radius = float(data.get("section_radius", 1.0))
    _require(section_radius > 0, f"{source}: 'section_radius' must be positive")

    return SimConfig(
        curves=curves,
        poses=poses,
        flow=flow,
        model=model,
        eps=eps,
        initial_twists=twists,
        T=T,
        dt=dt,
        nodes=nodes,
        collision_threshold=ct,
        outputs=dict(data.get("outputs", {})),
        grid=grid,
        seed=int(data.get("seed", 0)),
        density=density,
        section_radius=section_radius,
        raw=data,
    )


def load_config(path):
    """Load and validate a JSON config file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    return parse_config(data, source=str(path))


def parse_pose(spec, source="pose"):
    """Pose from {'translation': ..., 'quaternion' | 'axis_angle' | 'rotation'}."""
    if not isinstance(spec, dict):
        raise ConfigError(f"{source}: pose must be an object")
    h = np.asarray(spec.get("translation", [0.0, 0.0, 0.0]), dtype=float)
    if h.shape != (3,):
        raise ConfigError(f"{source}: 'translation' must have 3 components")
    given = [k for k in ("quaternion", "axis_angle", "rotation") if k in spec]
    if len(given) > 1:
        raise ConfigError(f"{source}: give at most one of quaternion/axis_angle/rotation")
    if "quaternion" in spec:
        Q = rotation_from_quaternion(spec["quaternion"])
    elif "axis_angle" in spec:
        aa = spec["axis_angle"]
        Q = rotation_from_axis_angle(aa["axis"], aa["angle"])
    elif "rotation" in spec:
        Q = check_rotation(np.asarray(spec["rotation"], dtype=float))
    else:
        Q = np.eye(3)
    return Pose(h, Q)


def parse_twist(spec, source="twist"):
    if isinstance(spec, dict):
        return TwistVelocity(
            np.asarray(spec.get("linear", [0, 0, 0]), dtype=float),
            np.asarray(spec.get("angular", [0, 0, 0]), dtype=float),
        )
    arr = np.asarray(spec, dtype=float)
    if arr.shape != (6,):
        raise ConfigError(f"{source}: a twist needs 6 components or linear/angular keys")
    return TwistVelocity(arr[:3], arr[3:])


@dataclass
class Scene:
    """Resolved simulation inputs: centered reference curves plus physics."""

    curves: list
    poses: list
    flow: object
    inertias: list
    cross_sections: list
    initial_twists: list
    collision_threshold: float


def build_scene(cfg):
    """Materialize a SimConfig: curves resampled and recentered, flow checked."""
    refs = []
    xsecs = []
    inertias = []
    thickness = cfg.eps if cfg.eps is not None else 0.01
    for i, spec in enumerate(cfg.curves):
        try:
            curve = curve_from_spec(spec, default_nodes=cfg.nodes)
        except Exception as exc:
            raise ConfigError(f"curves[{i}]: {exc}") from exc
        curve, _ = recenter(curve)
        curve.require_curved()
        refs.append(curve)
        radius = float(spec.get("section_radius", cfg.section_radius))
        xsec = circular_cross_section(curve, radius=radius, thickness=thickness)
        xsecs.append(xsec)
        inertias.append(inertia_from_filament(curve, xsec, cfg.density))

    poses = [parse_pose(p, source=f"poses[{i}]") for i, p in enumerate(cfg.poses)]
    flow = flow_from_spec(cfg.flow)
    probe = np.vstack([c.nodes[::8] for c in refs])
    flow.check_divergence_free(probe)

    twists = None
    if cfg.initial_twists is not None:
        twists = [
            parse_twist(t, source=f"initial_twists[{i}]")
            for i, t in enumerate(cfg.initial_twists)
        ]
    threshold = cfg.collision_threshold
    if threshold is None:
        threshold = default_collision_threshold(refs)
    return Scene(
        curves=refs,
        poses=poses,
        flow=flow,
        inertias=inertias,
        cross_sections=xsecs,
        initial_twists=twists,
        collision_threshold=threshold,
    )
