"""Command-line interface: simulate, field, verify, sweep.

Exit codes: 0 on success (a collision halt is a successful run, flagged in
the manifest), 2 on configuration errors, 1 on verification failures or
runtime errors.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import build_scene, load_config
from .dynamics import fit_decay_rate, integrate_limit, integrate_relaxation, limit_rhs, make_system_state
from .errors import ConfigError, FilStokesError
from .flowfield import GridSpec, divergence_check, perturbation_field
from .mobility import faxen_load, resistance_matrix
from .outputs import (
    svg_field_slice,
    svg_line_plot,
    write_field,
    write_manifest,
    write_matrix_csv,
    write_trajectory_csv,
)
from .verify import run_suite


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="filstokes",
        description="Rigid filaments in steady Stokes flow: limit dynamics, "
        "relaxation model, and perturbation fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a configured scenario")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", default="out")
    sim.add_argument("--dump-matrices", action="store_true",
                     help="export initial resistance matrices and Faxen loads as CSV")

    fld = sub.add_parser("field", help="evaluate the perturbation field on a grid")
    fld.add_argument("--config", required=True)
    fld.add_argument("--out", default="out")
    fld.add_argument("--grid", type=int, default=None,
                     help="override grid dims with N (N x N x N)")

    ver = sub.add_parser("verify", help="run invariant suites")
    ver.add_argument("suite", choices=["kernels", "mobility", "dynamics",
                                       "flowfield", "all"])
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", default=None)

    swp = sub.add_parser("sweep", help="convergence study over dt, nodes, or eps")
    swp.add_argument("--config", required=True)
    swp.add_argument("--param", required=True, choices=["dt", "nodes", "eps"])
    swp.add_argument("--values", required=True,
                     help="comma-separated parameter values")
    swp.add_argument("--out", default="out")
    return parser


def _grid_spec_from_config(cfg, scene, override_n=None):
    grid = cfg.grid or {}
    dims = grid.get("dims", [16, 16, 16])
    dims = [dims] * 3 if isinstance(dims, int) else list(dims)
    if override_n is not None:
        dims = [override_n] * 3
    if "origin" in grid and "spacing" in grid:
        return GridSpec(grid["origin"], grid["spacing"], dims)
    # auto grid: bounding box of the placed curves with a 60% margin
    state = make_system_state(scene.poses, scene.curves)
    pts = np.vstack([c.nodes for c in state.placed(scene.curves)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    center, span = 0.5 * (lo + hi), float(np.max(hi - lo)) or 1.0
    span *= 1.6
    spacing = grid.get("spacing", span / (max(dims) - 1 if max(dims) > 1 else 1))
    origin = center - 0.5 * spacing * (np.asarray(dims) - 1)
    return GridSpec(origin, spacing, dims)


def _write_plots(traj, out):
    files = []
    t = traj.times
    series = []
    for i in range(traj.n_bodies):
        for axis, name in enumerate("xyz"):
            series.append((t, traj.translations[:, i, axis], f"h{name}[{i}]"))
    path = out / "trajectory.svg"
    svg_line_plot(path, series, title="body translations", xlabel="t", ylabel="h")
    files.append(str(path))
    if traj.model == "relaxation" and np.any(traj.energy > 0):
        path = out / "energy.svg"
        svg_line_plot(
            path,
            [(t, traj.energy, "E"), (t, traj.z, "Z")],
            title="modulated energy",
            xlabel="t",
            ylabel="E, Z",
            logy=True,
        )
        files.append(str(path))
    return files


def _cmd_simulate(args):
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t_start = time.perf_counter()
    scene = build_scene(cfg)
    dt = cfg.resolved_dt()
    if cfg.model == "limit":
        traj = integrate_limit(
            scene.curves, scene.poses, scene.flow, cfg.T, dt,
            collision_threshold=scene.collision_threshold,
        )
    else:
        traj = integrate_relaxation(
            scene.curves, scene.poses, scene.flow, scene.inertias, cfg.eps,
            cfg.T, dt, xsecs=scene.cross_sections,
            initial_twists=scene.initial_twists,
            collision_threshold=scene.collision_threshold,
        )
    wall = time.perf_counter() - t_start

    files = []
    if cfg.outputs.get("trajectory", True):
        csv_path = out / "trajectory.csv"
        write_trajectory_csv(traj, csv_path)
        files.append(str(csv_path))
    if cfg.outputs.get("plots", False):
        files.extend(_write_plots(traj, out))
    if cfg.outputs.get("field", False) and cfg.grid is not None:
        files.extend(_emit_field(cfg, scene, out))
    if args.dump_matrices:
        state = make_system_state(scene.poses, scene.curves)
        for i, (curve, body) in enumerate(zip(scene.curves, state.bodies)):
            from .curves import place

            world = place(curve, body.pose)
            K = resistance_matrix(world, body.pose.translation)
            load = faxen_load(world, body.pose.translation, scene.flow, 0.0)
            files.append(str(write_matrix_csv(K.entries, out / f"resistance_{i}.csv")))
            files.append(str(write_matrix_csv(load.stacked[None, :],
                                              out / f"faxen_{i}.csv")))

    extras = {
        "model": traj.model,
        "wall_time_s": wall,
        "halted_at_collision": traj.halted_at_collision,
        "collision_time": traj.collision_time,
        "n_steps": int(round(cfg.T / dt)),
        "dt": dt,
        "final_time": float(traj.times[-1]),
        "files": files,
    }
    if traj.model == "relaxation":
        rate, npts = fit_decay_rate(traj.times, traj.twist_gap())
        extras["fitted_decay_rate"] = rate
        extras["decay_fit_points"] = npts
        extras["lambda_min"] = traj.lambda_min
        extras["predicted_decay_rate"] = (
            traj.lambda_min / cfg.eps**2 if traj.lambda_min is not None else None
        )
    write_manifest(out / "manifest.json", cfg.raw, extras)
    print(f"wrote {out}/manifest.json"
          + (f" (halted at collision t={traj.collision_time:g})"
             if traj.halted_at_collision else ""))
    return 0


def _emit_field(cfg, scene, out, override_n=None):
    state = make_system_state(scene.poses, scene.curves)
    twists = limit_rhs(state, scene.flow, scene.curves)
    spec = _grid_spec_from_config(cfg, scene, override_n)
    grid = perturbation_field(state, scene.flow, scene.curves, spec, twists=twists)
    files = write_field(grid, str(out / "field"))
    slice_path = out / "field_slice.svg"
    svg_field_slice(grid, slice_path)
    files.append(str(slice_path))
    try:
        div = divergence_check(grid)
    except FilStokesError:
        div = None
    report = {
        "dims": list(spec.dims),
        "origin": [float(v) for v in spec.origin],
        "spacing": spec.spacing,
        "max_scaled_divergence": div,
        "masked_points": int(grid.mask.sum()),
    }
    report_path = out / "field_report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files.append(str(report_path))
    return files


def _cmd_field(args):
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scene = build_scene(cfg)
    files = _emit_field(cfg, scene, out, override_n=args.grid)
    write_manifest(out / "manifest.json", cfg.raw, {"files": files, "mode": "field"})
    print(f"wrote {len(files)} field files to {out}/")
    return 0


def _cmd_verify(args):
    checks = run_suite(args.suite, seed=args.seed)
    n_fail = sum(not c["passed"] for c in checks)
    for c in checks:
        tag = "PASS" if c["passed"] else "FAIL"
        print(f"{tag} {c['name']}: {c['detail']}")
    print(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        payload = {"suite": args.suite, "passed": n_fail == 0, "checks": checks}
        with open(out / f"verify_{args.suite}.json", "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if n_fail == 0 else 1


def _cmd_sweep(args):
    from .sweeps import convergence_study

    cfg = load_config(args.config)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    result = convergence_study(cfg, args.param, values, out_dir=args.out)
    sys.stdout.write(result.table())
    for key, val in result.summary.items():
        print(f"{key}: {val}")
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "field": _cmd_field,
        "verify": _cmd_verify,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FilStokesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
