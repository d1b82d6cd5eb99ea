"""File outputs: trajectory CSV, structured field files, SVG plots, manifests.

Floats are written with repr (shortest round-trip form), so identical runs
produce byte-identical files.  Plots are emitted as standalone SVG with no
plotting dependency.
"""

import json
import math
import platform
import time

import numpy as np

TRAJECTORY_HEADER = (
    "t,body,hx,hy,hz,q11,q12,q13,q21,q22,q23,q31,q32,q33,"
    "vx,vy,vz,wx,wy,wz,d_min,E,Z"
)


def _fmt(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_trajectory_csv(trajectory, path):
    """One row per (time, body): pose, twist, d_min and energy diagnostics."""
    lines = [TRAJECTORY_HEADER]
    m = len(trajectory.times)
    for k in range(m):
        for i in range(trajectory.n_bodies):
            row = [
                _fmt(trajectory.times[k]),
                str(i),
                *(_fmt(v) for v in trajectory.translations[k, i]),
                *(_fmt(v) for v in trajectory.rotations[k, i].reshape(9)),
                *(_fmt(v) for v in trajectory.twists[k, i]),
                _fmt(trajectory.d_min[k]),
                _fmt(trajectory.energy[k]),
                _fmt(trajectory.z[k]),
            ]
            lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory_csv(path):
    """Columns of a trajectory CSV as a dict of arrays (helper for tests/demos)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.array(
            [[float(v) for v in line.split(",")] for line in fh if line.strip()]
        )
    return {name: data[:, j] for j, name in enumerate(header)}


def write_field(grid, path_prefix):
    """Structured-points text file plus a flat CSV export.

    The .txt layout: header lines (dims, origin, spacing), then one line per
    point in x-fastest order: ux uy uz p mask.
    """
    nx, ny, nz = grid.dims
    txt_path = f"{path_prefix}.txt"
    csv_path = f"{path_prefix}.csv"
    with open(txt_path, "w") as fh:
        fh.write("filstokes structured points\n")
        fh.write(f"dims {nx} {ny} {nz}\n")
        fh.write("origin " + " ".join(_fmt(v) for v in grid.origin) + "\n")
        fh.write(f"spacing {_fmt(grid.spacing)}\n")
        fh.write("columns ux uy uz p mask\n")
        for k in range(nz):
            for j in range(ny):
                for i in range(nx):
                    u = grid.velocity[i, j, k]
                    fh.write(
                        f"{_fmt(u[0])} {_fmt(u[1])} {_fmt(u[2])} "
                        f"{_fmt(grid.pressure[i, j, k])} "
                        f"{int(grid.mask[i, j, k])}\n"
                    )
    with open(csv_path, "w") as fh:
        fh.write("x,y,z,ux,uy,uz,p,mask\n")
        for k in range(nz):
            for j in range(ny):
                for i in range(nx):
                    x = grid.origin + grid.spacing * np.array([i, j, k], dtype=float)
                    u = grid.velocity[i, j, k]
                    fh.write(
                        ",".join(_fmt(v) for v in x)
                        + ","
                        + ",".join(_fmt(v) for v in u)
                        + f",{_fmt(grid.pressure[i, j, k])},{int(grid.mask[i, j, k])}\n"
                    )
    return [txt_path, csv_path]


def read_field(path):
    """Read back a structured-points .txt file -> (origin, spacing, dims, u, p, mask)."""
    with open(path) as fh:
        fh.readline()
        dims = tuple(int(v) for v in fh.readline().split()[1:4])
        origin = np.array([float(v) for v in fh.readline().split()[1:4]])
        spacing = float(fh.readline().split()[1])
        fh.readline()
        rows = np.array([[float(v) for v in line.split()] for line in fh])
    nx, ny, nz = dims
    u = np.zeros((nx, ny, nz, 3))
    p = np.zeros((nx, ny, nz))
    mask = np.zeros((nx, ny, nz), dtype=bool)
    idx = 0
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                u[i, j, k] = rows[idx, :3]
                p[i, j, k] = rows[idx, 3]
                mask[i, j, k] = bool(rows[idx, 4])
                idx += 1
    return origin, spacing, dims, u, p, mask


def write_manifest(path, config_raw, extras):
    """JSON run manifest: config echo, versions, wall time, run diagnostics."""
    import scipy

    from . import __version__

    manifest = {
        "config": config_raw,
        "versions": {
            "filstokes": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "created_unix": time.time(),
    }
    manifest.update(extras)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return path


def write_matrix_csv(matrix, path, header=None):
    with open(path, "w") as fh:
        if header:
            fh.write(header + "\n")
        for row in np.atleast_2d(np.asarray(matrix, dtype=float)):
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


# -- minimal SVG plotting -----------------------------------------------------

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _ticks(lo, hi, n=5):
    if not math.isfinite(lo) or not math.isfinite(hi) or lo == hi:
        return [lo]
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / max(n, 1)))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(t)
        t += step
    return out


def _log_ticks(lo, hi):
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    return [10.0**e for e in range(lo_e, hi_e + 1)]


def svg_line_plot(path, series, title="", xlabel="", ylabel="",
                  logx=False, logy=False, width=640, height=420):
    """Plot (x, y, label) series as SVG polylines with simple axes.

    Nonpositive values are dropped on log axes.
    """
    margin_l, margin_r, margin_t, margin_b = 70, 20, 34, 48
    pw, ph = width - margin_l - margin_r, height - margin_t - margin_b

    def prep(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logx:
            keep &= x > 0
        if logy:
            keep &= y > 0
        return x[keep], y[keep]

    cleaned = [(prep(x, y), label) for x, y, label in series]
    xs = np.concatenate([c[0][0] for c in cleaned if len(c[0][0])] or [np.array([0.0, 1.0])])
    ys = np.concatenate([c[0][1] for c in cleaned if len(c[0][1])] or [np.array([0.0, 1.0])])
    tx = np.log10(xs) if logx else xs
    ty = np.log10(ys) if logy else ys
    x0, x1 = float(tx.min()), float(tx.max())
    y0, y1 = float(ty.min()), float(ty.max())
    if x0 == x1:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y0 == y1:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(v):
        v = math.log10(v) if logx else v
        return margin_l + (v - x0) / (x1 - x0) * pw

    def sy(v):
        v = math.log10(v) if logy else v
        return margin_t + ph - (v - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin_l}" y="{margin_t}" width="{pw}" height="{ph}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    xticks = _log_ticks(10**x0, 10**x1) if logx else _ticks(x0, x1)
    yticks = _log_ticks(10**y0, 10**y1) if logy else _ticks(y0, y1)
    for t in xticks:
        px = sx(t)
        if margin_l - 1 <= px <= margin_l + pw + 1:
            parts.append(
                f'<line x1="{px:.1f}" y1="{margin_t + ph}" x2="{px:.1f}" '
                f'y2="{margin_t + ph + 5}" stroke="#333"/>'
            )
            label = f"{t:.3g}"
            parts.append(
                f'<text x="{px:.1f}" y="{margin_t + ph + 18}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11">{label}</text>'
            )
    for t in yticks:
        py = sy(t)
        if margin_t - 1 <= py <= margin_t + ph + 1:
            parts.append(
                f'<line x1="{margin_l - 5}" y1="{py:.1f}" x2="{margin_l}" '
                f'y2="{py:.1f}" stroke="#333"/>'
            )
            parts.append(
                f'<text x="{margin_l - 8}" y="{py + 4:.1f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="11">{t:.3g}</text>'
            )
    if xlabel:
        parts.append(
            f'<text x="{margin_l + pw / 2}" y="{height - 10}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="16" y="{margin_t + ph / 2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 16 {margin_t + ph / 2})">{ylabel}</text>'
        )
    for idx, ((x, y), label) in enumerate(cleaned):
        if len(x) == 0:
            continue
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        if label:
            ly = margin_t + 14 + 14 * idx
            parts.append(
                f'<line x1="{margin_l + pw - 110}" y1="{ly - 4}" '
                f'x2="{margin_l + pw - 90}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
            )
            parts.append(
                f'<text x="{margin_l + pw - 84}" y="{ly}" font-family="sans-serif" '
                f'font-size="11">{label}</text>'
            )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return path


def _colormap(v):
    """0..1 -> hex color (dark blue to yellow)."""
    stops = [
        (0.267, 0.005, 0.329),
        (0.282, 0.364, 0.554),
        (0.128, 0.567, 0.551),
        (0.369, 0.788, 0.382),
        (0.993, 0.906, 0.144),
    ]
    v = min(max(float(v), 0.0), 1.0) * (len(stops) - 1)
    i = min(int(v), len(stops) - 2)
    f = v - i
    rgb = [stops[i][c] * (1 - f) + stops[i + 1][c] * f for c in range(3)]
    return "#" + "".join(f"{int(255 * c):02x}" for c in rgb)


def svg_field_slice(grid, path, axis=2, index=None, cell=12):
    """Heat map of |u| with in-plane quiver arrows for one grid slice."""
    axis = int(axis)
    if index is None:
        index = grid.dims[axis] // 2
    take = [slice(None)] * 3
    take[axis] = index
    u = grid.velocity[tuple(take)]
    mask = grid.mask[tuple(take)]
    in_plane = [a for a in range(3) if a != axis]
    n1, n2 = u.shape[0], u.shape[1]
    mag = np.linalg.norm(u, axis=-1)
    vmax = float(mag.max()) or 1.0
    width, height = n1 * cell + 20, n2 * cell + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for i in range(n1):
        for j in range(n2):
            x, y = 10 + i * cell, 10 + (n2 - 1 - j) * cell
            color = "#cccccc" if mask[i, j] else _colormap(mag[i, j] / vmax)
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{color}"/>'
            )
            if not mask[i, j] and mag[i, j] > 0:
                v1 = u[i, j, in_plane[0]] / vmax * cell * 0.45
                v2 = u[i, j, in_plane[1]] / vmax * cell * 0.45
                cx, cy = x + cell / 2, y + cell / 2
                parts.append(
                    f'<line x1="{cx - v1:.1f}" y1="{cy + v2:.1f}" '
                    f'x2="{cx + v1:.1f}" y2="{cy - v2:.1f}" '
                    'stroke="black" stroke-width="0.8"/>'
                )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return path
