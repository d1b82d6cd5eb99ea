"""Convergence studies: dt sweeps, node sweeps, and eps sweeps.

Runs fan out over FILSTOKES_THREADS workers when requested and are merged
back in parameter order, so outputs are deterministic.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import build_scene
from .dynamics import (
    compare_trajectories,
    fit_decay_rate,
    integrate_limit,
    integrate_relaxation,
)
from .errors import ConfigError
from .mobility import resistance_matrix
from .outputs import svg_line_plot


def _thread_count():
    raw = os.environ.get("FILSTOKES_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    workers = _thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class StudyResult:
    param: str
    values: list
    rows: list  # list of dicts, one per parameter value
    columns: list
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def table(self):
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(repr(float(row[c])) for c in self.columns))
        return "\n".join(lines) + "\n"


def _pose_diff(traj_a, traj_b):
    dh = np.linalg.norm(traj_a.translations - traj_b.translations, axis=2)
    dQ = np.linalg.norm(
        (traj_a.rotations - traj_b.rotations).reshape(len(traj_a.times), -1, 9),
        axis=2,
    )
    return float(np.max(dh + dQ))


def _dt_study(cfg, values):
    scene = build_scene(cfg)
    values = sorted(float(v) for v in values)[::-1]

    def run(dt):
        return integrate_limit(
            scene.curves, scene.poses, scene.flow, cfg.T, dt,
            collision_threshold=scene.collision_threshold,
            record_every=10**9,  # final state only
        )

    trajectories = _parallel_map(run, values)
    rows = []
    for i, dt in enumerate(values):
        row = {"dt": dt, "error": math.nan, "order": math.nan}
        if i + 1 < len(values):
            row["error"] = _pose_diff(trajectories[i], trajectories[i + 1])
        rows.append(row)
    for i in range(len(values) - 2):
        e1, e2 = rows[i]["error"], rows[i + 1]["error"]
        if e1 > 0 and e2 > 0:
            rows[i]["order"] = math.log(e1 / e2) / math.log(values[i] / values[i + 1])
    orders = [r["order"] for r in rows if not math.isnan(r["order"])]
    summary = {"observed_order": float(np.mean(orders)) if orders else None}
    return StudyResult("dt", values, rows, ["dt", "error", "order"], summary)


def _nodes_study(cfg, values):
    values = sorted(int(v) for v in values)
    spec = dict(cfg.curves[0])
    ref_n = 4 * max(values)

    def k_of(n):
        from .curves import curve_from_spec, recenter

        s = dict(spec)
        s["nodes"] = n
        curve, _ = recenter(curve_from_spec(s, default_nodes=n))
        return resistance_matrix(curve, np.zeros(3)).entries

    K_ref = k_of(ref_n)
    scale = np.max(np.abs(K_ref))
    rows = []
    for n in values:
        err = float(np.max(np.abs(k_of(n) - K_ref)) / scale)
        rows.append({"nodes": n, "rel_error": err})
    summary = {"min_rel_error": rows[-1]["rel_error"], "reference_nodes": ref_n}
    return StudyResult("nodes", values, rows, ["nodes", "rel_error"], summary)


def _layer_probe_rate(scene, cfg, eps):
    """Fit the initial-layer decay on a short run whose dt resolves the layer."""
    from scipy.linalg import eigh

    from .dynamics import make_relaxation_state, make_system_state

    state0 = make_system_state(scene.poses, scene.curves)
    rs0 = make_relaxation_state(
        state0, scene.flow, scene.curves, scene.inertias, eps,
        xsecs=scene.cross_sections,
    )
    lam, _ = eigh(rs0.K, rs0.M)
    predicted = lam[0] / eps**2
    T_probe = 16.0 / predicted
    probe = integrate_relaxation(
        scene.curves, scene.poses, scene.flow, scene.inertias, eps,
        T_probe, T_probe / 400.0, xsecs=scene.cross_sections,
        initial_twists=scene.initial_twists,
        collision_threshold=scene.collision_threshold,
    )
    rate, _ = fit_decay_rate(probe.times, probe.twist_gap())
    return rate


def _eps_study(cfg, values):
    scene = build_scene(cfg)
    values = sorted(float(v) for v in values)[::-1]
    dt = cfg.resolved_dt()
    limit = integrate_limit(
        scene.curves, scene.poses, scene.flow, cfg.T, dt,
        collision_threshold=scene.collision_threshold,
    )

    def run(eps):
        return integrate_relaxation(
            scene.curves, scene.poses, scene.flow, scene.inertias, eps,
            cfg.T, dt, xsecs=scene.cross_sections,
            initial_twists=scene.initial_twists,
            collision_threshold=scene.collision_threshold,
        )

    relaxed = _parallel_map(run, values)
    rates = _parallel_map(lambda eps: _layer_probe_rate(scene, cfg, eps), values)
    rows = []
    for eps, traj, rate in zip(values, relaxed, rates):
        comparison = compare_trajectories(traj, limit)
        logf = abs(math.log(eps))
        rows.append({
            "eps": eps,
            "sup_pose_error": comparison.sup_pose_error,
            "decay_rate": rate if rate is not None else math.nan,
            "rate_times_eps2_log": (rate * eps**2 * logf) if rate else math.nan,
        })
    errors = [r["sup_pose_error"] for r in rows]
    summary = {
        "monotone_decreasing": bool(
            all(errors[i] > errors[i + 1] for i in range(len(errors) - 1))
        )
    }
    return StudyResult(
        "eps", values, rows,
        ["eps", "sup_pose_error", "decay_rate", "rate_times_eps2_log"], summary,
    )


def convergence_study(cfg, param, values, out_dir=None):
    """Run a parameter sweep; see the README for the three supported params."""
    if len(values) < 2:
        raise ConfigError("a sweep needs at least 2 parameter values")
    if param == "dt":
        result = _dt_study(cfg, values)
        xcol, ycol = "dt", "error"
    elif param == "nodes":
        result = _nodes_study(cfg, values)
        xcol, ycol = "nodes", "rel_error"
    elif param == "eps":
        result = _eps_study(cfg, values)
        xcol, ycol = "eps", "sup_pose_error"
    else:
        raise ConfigError(f"unknown sweep parameter {param!r}; have dt, nodes, eps")

    if out_dir is not None:
        import pathlib

        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        table_path = out / f"sweep_{param}.csv"
        with open(table_path, "w") as fh:
            fh.write(result.table())
        xs = [row[xcol] for row in result.rows]
        ys = [row[ycol] for row in result.rows]
        keep = [(x, y) for x, y in zip(xs, ys) if y == y and y > 0]
        plot_path = out / f"sweep_{param}.svg"
        if keep:
            svg_line_plot(
                plot_path,
                [([x for x, _ in keep], [y for _, y in keep], ycol)],
                title=f"{ycol} vs {xcol}",
                xlabel=xcol,
                ylabel=ycol,
                logx=True,
                logy=True,
            )
            result.files.append(str(plot_path))
        result.files.append(str(table_path))
    return result
