#!/usr/bin/env python3
"""Render orbit clouds and leaf-dimension maps to raster images.

Consumes exactly the CSV contracts of the orbitkit CLI:

* orbit clouds: header ``x1,...,xn,word``, one row per point, the word in
  the last column;
* leaf maps: header ``# dims: nx,ny[,nz] box: lo1,hi1,...`` followed by an
  integer matrix.

Kinds: ``scatter2d``, ``scatter3d`` (clouds), ``heatmap`` (one leaf map),
``diffmap`` (leaf map minus a second leaf map given with ``--in2``).

Alongside every image a JSON sidecar (``<out>.json``) records min/max and
class counts computed from the CSV data, so a consumer can verify the
renderer never altered the numbers.  Malformed input yields a nonzero exit
status and no output file.
"""
from __future__ import annotations

import argparse
import json
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import BoundaryNorm, ListedColormap  # noqa: E402

# discrete palette for integer dimensions: 0 gray, 1 blue, 2 green, 3 orange
DIM_COLORS = ["#888888", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#d62728"]


class InputError(Exception):
    pass


def parse_cloud_csv(path: str):
    """Orbit cloud contract: x1..xn,word header, float coordinates."""
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}")
    if not lines:
        raise InputError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[-1] != "word" or len(header) < 2:
        raise InputError(f"{path}: expected header x1,...,xn,word")
    n = len(header) - 1
    for k, name in enumerate(header[:-1]):
        if name != f"x{k+1}":
            raise InputError(f"{path}: column {k} is {name!r}, expected x{k+1}")
    points = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != n + 1:
            raise InputError(f"{path}: row has {len(parts)} columns, expected {n+1}")
        try:
            points.append([float(v) for v in parts[:n]])
        except ValueError as exc:
            raise InputError(f"{path}: bad coordinate: {exc}")
    if not points:
        raise InputError(f"{path}: empty cloud")
    return np.asarray(points)


def parse_leafmap_csv(path: str):
    """Leaf map contract: `# dims: ... box: ...` header, integer matrix."""
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}")
    if not lines or not lines[0].startswith("# dims:"):
        raise InputError(f"{path}: missing '# dims:' header")
    try:
        dims_part, box_part = lines[0][len("# dims:"):].split("box:")
        res = tuple(int(v) for v in dims_part.strip().split(","))
        nums = [float(v) for v in box_part.strip().split(",")]
    except ValueError as exc:
        raise InputError(f"{path}: bad header: {exc}")
    if len(nums) != 2 * len(res):
        raise InputError(f"{path}: box does not match dims")
    lo, hi = nums[0::2], nums[1::2]
    try:
        rows = [[int(v) for v in ln.split(",")] for ln in lines[1:]]
        grid = np.array(rows, dtype=int).reshape(res)
    except ValueError as exc:
        raise InputError(f"{path}: bad matrix: {exc}")
    return grid, lo, hi


def class_counts(values) -> dict:
    vals, counts = np.unique(np.asarray(values, dtype=int), return_counts=True)
    return {str(int(v)): int(c) for v, c in zip(vals, counts)}


def _dim_cmap(vmax: int):
    colors = [DIM_COLORS[min(v, len(DIM_COLORS) - 1)] for v in range(vmax + 1)]
    cmap = ListedColormap(colors)
    norm = BoundaryNorm(np.arange(-0.5, vmax + 1.0), cmap.N)
    return cmap, norm


def render_scatter(points: np.ndarray, out: str, three_d: bool,
                   xlabel: str, ylabel: str, title: str) -> dict:
    n = points.shape[1]
    want = 3 if three_d else 2
    if n != want:
        raise InputError(f"scatter{'3d' if three_d else '2d'} needs dimension "
                         f"{want}, cloud has {n}")
    fig = plt.figure(figsize=(6, 6))
    if three_d:
        ax = fig.add_subplot(projection="3d")
        ax.scatter(points[:, 0], points[:, 1], points[:, 2], s=4)
        ax.set_zlabel("x3")
    else:
        ax = fig.add_subplot()
        ax.scatter(points[:, 0], points[:, 1], s=6)
        ax.set_aspect("equal")
    ax.set_xlabel(xlabel or "x1")
    ax.set_ylabel(ylabel or "x2")
    if title:
        ax.set_title(title)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    radii = np.linalg.norm(points, axis=1)
    return {
        "points": int(points.shape[0]),
        "min": [float(v) for v in points.min(axis=0)],
        "max": [float(v) for v in points.max(axis=0)],
        "max_radius_dev": float(np.max(np.abs(radii - 1.0))),
    }


def render_grid(grid: np.ndarray, lo, hi, out: str, xlabel: str, ylabel: str,
                title: str) -> dict:
    if grid.ndim != 2:
        raise InputError(f"heatmap needs a 2-d map, got {grid.ndim}-d")
    vmax = max(int(grid.max()), 1)
    cmap, norm = _dim_cmap(vmax)
    fig, ax = plt.subplots(figsize=(6, 5))
    # grid[i, j]: axis 0 varies along rows; show axis 0 horizontally
    im = ax.imshow(grid.T, origin="lower", cmap=cmap, norm=norm,
                   extent=(lo[0], hi[0], lo[1], hi[1]), aspect="auto")
    fig.colorbar(im, ax=ax, ticks=range(vmax + 1))
    ax.set_xlabel(xlabel or "x1")
    ax.set_ylabel(ylabel or "x2")
    if title:
        ax.set_title(title)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return {
        "nodes": int(grid.size),
        "min": int(grid.min()),
        "max": int(grid.max()),
        "class_counts": class_counts(grid),
    }


def render(kind: str, in_path: str, out: str, in2: str = None,
           xlabel: str = "", ylabel: str = "", title: str = "") -> dict:
    """Render one job and return the sidecar payload (also written to disk)."""
    if kind in ("scatter2d", "scatter3d"):
        points = parse_cloud_csv(in_path)
        meta = render_scatter(points, out, kind == "scatter3d", xlabel, ylabel,
                              title)
    elif kind == "heatmap":
        grid, lo, hi = parse_leafmap_csv(in_path)
        meta = render_grid(grid, lo, hi, out, xlabel, ylabel, title)
    elif kind == "diffmap":
        if not in2:
            raise InputError("diffmap needs --in2 (the map to subtract)")
        a, lo, hi = parse_leafmap_csv(in_path)
        b, lo2, hi2 = parse_leafmap_csv(in2)
        if a.shape != b.shape or lo != lo2 or hi != hi2:
            raise InputError("diffmap inputs have different grids")
        meta = render_grid(a - b, lo, hi, out, xlabel, ylabel,
                           title or "saturation minus rank")
    else:
        raise InputError(f"unknown kind {kind!r}")
    sidecar = {"kind": kind, "input": in_path, **meta}
    if in2:
        sidecar["input2"] = in2
    with open(out + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
    return sidecar


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="render.py", description=__doc__)
    ap.add_argument("--in", dest="in_path", required=True)
    ap.add_argument("--in2", help="second leaf map (diffmap only)")
    ap.add_argument("--kind", required=True,
                    choices=["scatter2d", "scatter3d", "heatmap", "diffmap"])
    ap.add_argument("--out", required=True)
    ap.add_argument("--xlabel", default="")
    ap.add_argument("--ylabel", default="")
    ap.add_argument("--title", default="")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        sidecar = render(args.kind, args.in_path, args.out, args.in2,
                         args.xlabel, args.ylabel, args.title)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(sidecar, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
