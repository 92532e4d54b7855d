#!/usr/bin/env python3
"""Figure rendering for herlab experiment outputs.

Two subcommands, both reading only the CSV files the harness emits:

    plots.py curves  --glob 'out/runs/*/*.csv' --out fig.png
    plots.py heatmap --csv out/probe/<hash>/<seed>.csv --out fig.png

``curves`` draws one line per strategy (mean success rate across seeds) with
a +/- one standard deviation band. Runs are grouped by the ``strategy`` field
of the ``meta.json`` sitting next to each run CSV (falling back to the parent
directory name). ``heatmap`` draws one subplot per probe snapshot with a
color scale shared across snapshots and anchored at 0, the highest value a
sparse-reward critic can take.
"""
from __future__ import annotations

import argparse
import csv
import glob as globlib
import json
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

RUN_HEADER = ["env_step", "success_rate", "mean_return"]
PROBE_HEADER = ["env_step", "state_x", "state_y", "value"]
PROBE_KEY_HEADER = ["env_step", "state_key", "value"]


class PlotInputError(Exception):
    pass


def read_run_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Return (env_steps, success_rates) from one run CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RUN_HEADER:
            raise PlotInputError(f"{path}: expected header {','.join(RUN_HEADER)}, got {header}")
        rows = [(int(r[0]), float(r[1])) for r in reader]
    steps = np.array([r[0] for r in rows], dtype=int)
    rates = np.array([r[1] for r in rows], dtype=float)
    return steps, rates


def group_runs_by_strategy(pattern: str) -> dict[str, list[Path]]:
    paths = sorted(Path(p) for p in globlib.glob(pattern))
    if not paths:
        raise PlotInputError(f"no run CSVs match pattern {pattern!r}")
    groups: dict[str, list[Path]] = defaultdict(list)
    for path in paths:
        meta_path = path.parent / "meta.json"
        if meta_path.is_file():
            label = json.loads(meta_path.read_text())["strategy"]
        else:
            label = path.parent.name
        groups[label].append(path)
    return dict(groups)


def aggregate_curves(curves: list[tuple[np.ndarray, np.ndarray]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Align per-seed curves on their shared step grid; mean and std per step."""
    steps = curves[0][0]
    for s, _ in curves[1:]:
        if len(s) != len(steps) or np.any(s != steps):
            raise PlotInputError("run CSVs have misaligned evaluation step grids")
    stacked = np.vstack([r for _, r in curves])
    return steps, stacked.mean(axis=0), stacked.std(axis=0)


def render_curves(groups: dict[str, list[Path]], out_path: str | Path):
    """One mean line + one std band per strategy; writes a raster image."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label in sorted(groups):
        curves = [read_run_csv(p) for p in groups[label]]
        steps, mean, std = aggregate_curves(curves)
        (line,) = ax.plot(steps, mean, label=f"{label} (n={len(curves)})")
        ax.fill_between(steps, mean - std, mean + std, alpha=0.25, color=line.get_color())
    ax.set_xlabel("environment steps")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="lower right")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    return fig


def read_probe_csv(path: str | Path) -> list[tuple[int, dict[tuple[int, int], float]]]:
    """Return [(env_step, {(x, y): value})] in snapshot order."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header == PROBE_KEY_HEADER:
            raise PlotInputError(
                f"{path}: probe states are not planar; heatmaps need state_x/state_y "
                "columns (try the curves subcommand instead)"
            )
        if header != PROBE_HEADER:
            raise PlotInputError(f"{path}: expected header {','.join(PROBE_HEADER)}, got {header}")
        snapshots: dict[int, dict[tuple[int, int], float]] = {}
        order: list[int] = []
        for row in reader:
            step = int(row[0])
            if step not in snapshots:
                snapshots[step] = {}
                order.append(step)
            snapshots[step][(int(row[1]), int(row[2]))] = float(row[3])
    if not order:
        raise PlotInputError(f"{path}: probe CSV has no data rows")
    return [(step, snapshots[step]) for step in order]


def render_heatmaps(probe_csv: str | Path, out_path: str | Path):
    """One subplot per snapshot, color scale shared and anchored at 0."""
    snapshots = read_probe_csv(probe_csv)
    lo = min(min(vals.values()) for _, vals in snapshots)
    if lo >= 0.0:
        lo = -1e-3  # degenerate all-zero case still gets a visible scale
    width = 1 + max(x for _, vals in snapshots for x, _ in vals)
    height = 1 + max(y for _, vals in snapshots for _, y in vals)
    n = len(snapshots)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.4), squeeze=False)
    image = None
    for ax, (step, vals) in zip(axes[0], snapshots):
        grid = np.full((height, width), np.nan)
        for (x, y), v in vals.items():
            grid[y, x] = v
        image = ax.imshow(grid, origin="lower", vmin=lo, vmax=0.0, cmap="viridis")
        ax.set_title(f"step {step}")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.colorbar(image, ax=[a for a in axes[0]], label="greedy value", shrink=0.85)
    fig.savefig(out_path, dpi=120)
    return fig


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="plots.py", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    curves_p = sub.add_parser("curves", help="learning curves: mean +/- std per strategy")
    curves_p.add_argument("--glob", required=True, help="pattern matching run CSVs")
    curves_p.add_argument("--out", required=True, help="output image path")
    heat_p = sub.add_parser("heatmap", help="probe value heatmaps, one subplot per snapshot")
    heat_p.add_argument("--csv", required=True, help="probe CSV path")
    heat_p.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        if args.command == "curves":
            render_curves(group_runs_by_strategy(args.glob), args.out)
        else:
            render_heatmaps(args.csv, args.out)
    except (PlotInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        plt.close("all")
    return 0


if __name__ == "__main__":
    sys.exit(main())
