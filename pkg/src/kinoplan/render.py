"""Figure rendering: tree and path projections, and sweep summary plots.

All figures go straight to files via the Agg backend; SVG metadata is pinned
so identical inputs produce identical bytes.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "kinoplan"

import matplotlib.pyplot as plt
import numpy as np

from .collision import Box, Cylinder, Sphere
from .core import Path, Scenario, SearchTree
from .dynamics import get_system


def _savefig(fig, path: str) -> None:
    kwargs = {"metadata": {"Date": None}} if path.endswith(".svg") else {}
    fig.savefig(path, **kwargs)
    plt.close(fig)


def _draw_obstacles(ax, scenario: Scenario, dims) -> None:
    i, j = dims[0], dims[1]
    for obs in scenario.obstacles:
        if isinstance(obs, Box):
            ax.add_patch(
                plt.Rectangle(
                    (obs.lo[i], obs.lo[j]),
                    obs.hi[i] - obs.lo[i],
                    obs.hi[j] - obs.lo[j],
                    color="0.4",
                )
            )
        elif isinstance(obs, Sphere):
            ax.add_patch(plt.Circle((obs.center[i], obs.center[j]), obs.radius, color="0.4"))
        elif isinstance(obs, Cylinder) and (i, j) == (0, 1):
            ax.add_patch(plt.Circle(tuple(obs.center_xy), obs.radius, color="0.4"))


def render_trees(
    path_out: str,
    scenario: Scenario,
    fwd: Optional[SearchTree] = None,
    rev: Optional[SearchTree] = None,
    solution: Optional[Path] = None,
    title: Optional[str] = None,
) -> None:
    """Project trees and an optional solution onto the first two workspace axes."""
    model = get_system(scenario.system)
    dims = model.position_dims[:2]
    i, j = dims[0], dims[1]
    fig, ax = plt.subplots(figsize=(7, 7))
    _draw_obstacles(ax, scenario, dims)
    for tree, color in ((fwd, "tab:blue"), (rev, "tab:orange")):
        if tree is None:
            continue
        for edge in tree.edges:
            if edge is not None:
                ax.plot(edge.states[:, i], edge.states[:, j], color=color, lw=0.4, alpha=0.5)
    if solution is not None:
        for edge in solution.edges:
            ax.plot(edge.states[:, i], edge.states[:, j], color="tab:red", lw=1.8)
    ax.plot(scenario.start[i], scenario.start[j], "g^", ms=9, label="start")
    ax.plot(scenario.goal[i], scenario.goal[j], "r*", ms=12, label="goal")
    ax.set_xlim(scenario.bounds_lo[i], scenario.bounds_hi[i])
    ax.set_ylim(scenario.bounds_lo[j], scenario.bounds_hi[j])
    ax.set_aspect("equal")
    ax.set_xlabel(f"x[{i}]")
    ax.set_ylabel(f"x[{j}]")
    ax.legend(loc="upper right")
    if title:
        ax.set_title(title)
    _savefig(fig, path_out)


def render_time_histogram(path_out: str, records, s_max: float, title: str = "") -> None:
    """Histogram of per-trial solution times; failures land in the s_max bin."""
    times = [r.solution_time_s if r.success else s_max for r in records]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(times, bins=20, color="tab:blue", edgecolor="black")
    ax.set_xlabel("solution time [s]")
    ax.set_ylabel("trials")
    if title:
        ax.set_title(title)
    _savefig(fig, path_out)


def render_sweep(path_out: str, rows: Sequence[dict], title: str = "") -> None:
    """Median solve time against the swept parameter (log axis where set)."""
    values = [row["value"] for row in rows]
    medians = [row["time_median"] for row in rows]
    errs = [row["time_se"] for row in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.errorbar(values, medians, yerr=errs, marker="o", color="tab:blue")
    if rows and rows[0].get("scale") == "log":
        ax.set_xscale("log")
    ax.set_xlabel(rows[0]["axis"] if rows else "value")
    ax.set_ylabel("median solution time [s]")
    if title:
        ax.set_title(title)
    _savefig(fig, path_out)
