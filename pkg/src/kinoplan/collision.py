"""Workspace obstacles and collision checks on states and sampled edges.

The robot is modeled as a sphere of `robot_radius` around its workspace
position (the position dimensions of the state). Obstacle queries therefore
reduce to inflated point containment tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .core import Edge, KinoplanError, Scenario


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape or np.any(self.lo > self.hi):
            raise KinoplanError(f"malformed box: lo={self.lo}, hi={self.hi}")

    def distance(self, p: np.ndarray) -> float:
        d = np.maximum(np.maximum(self.lo[: len(p)] - p, p - self.hi[: len(p)]), 0.0)
        return float(np.linalg.norm(d))


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise KinoplanError(f"sphere radius must be positive, got {self.radius}")

    def distance(self, p: np.ndarray) -> float:
        return max(0.0, float(np.linalg.norm(p - self.center[: len(p)])) - self.radius)


@dataclass(frozen=True)
class Cylinder:
    """Axis-aligned vertical cylinder: a disk in (x, y), unbounded or capped in z."""

    center_xy: np.ndarray
    radius: float
    z_lo: float = -math.inf
    z_hi: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "center_xy", np.asarray(self.center_xy, dtype=float))
        if self.radius <= 0:
            raise KinoplanError(f"cylinder radius must be positive, got {self.radius}")
        if self.z_lo > self.z_hi:
            raise KinoplanError("cylinder z_lo > z_hi")

    def distance(self, p: np.ndarray) -> float:
        dr = max(0.0, float(np.hypot(p[0] - self.center_xy[0], p[1] - self.center_xy[1])) - self.radius)
        dz = 0.0
        if len(p) > 2:
            dz = max(0.0, self.z_lo - p[2], p[2] - self.z_hi)
        return math.hypot(dr, dz)


def obstacle_from_dict(d: dict) -> object:
    kind = d.get("kind")
    if kind == "box":
        return Box(lo=np.asarray(d["lo"], dtype=float), hi=np.asarray(d["hi"], dtype=float))
    if kind == "sphere":
        return Sphere(center=np.asarray(d["center"], dtype=float), radius=float(d["radius"]))
    if kind == "cylinder":
        return Cylinder(
            center_xy=np.asarray(d["center_xy"], dtype=float),
            radius=float(d["radius"]),
            z_lo=float(d.get("z_lo", -math.inf)),
            z_hi=float(d.get("z_hi", math.inf)),
        )
    raise KinoplanError(f"unknown obstacle kind {kind!r}")


def obstacle_to_dict(obs: object) -> dict:
    if isinstance(obs, Box):
        return {"kind": "box", "lo": obs.lo.tolist(), "hi": obs.hi.tolist()}
    if isinstance(obs, Sphere):
        return {"kind": "sphere", "center": obs.center.tolist(), "radius": obs.radius}
    if isinstance(obs, Cylinder):
        out = {
            "kind": "cylinder",
            "center_xy": obs.center_xy.tolist(),
            "radius": obs.radius,
        }
        if math.isfinite(obs.z_lo):
            out["z_lo"] = obs.z_lo
        if math.isfinite(obs.z_hi):
            out["z_hi"] = obs.z_hi
        return out
    raise KinoplanError(f"unknown obstacle type {type(obs).__name__}")


def state_in_collision(
    scenario: Scenario, state: np.ndarray, position_dims: Sequence[int]
) -> bool:
    """True if the robot sphere at `state` hits an obstacle or exits the bounds."""
    state = np.asarray(state, dtype=float)
    if not scenario.in_bounds(state):
        return True
    p = state[list(position_dims)]
    r = scenario.robot_radius
    for obs in scenario.obstacles:
        if obs.distance(p) < r:
            return True
    return False


def _points_hit_any(scenario: Scenario, pts: np.ndarray, margin: float = 0.0) -> bool:
    """Vectorized sphere-vs-obstacle test over an (n, k) array of positions.

    `margin` inflates the robot radius; with margin = spacing / 2 a pass
    guarantees the piecewise-linear path between checked points stays clear.
    """
    r = scenario.robot_radius + margin
    for obs in scenario.obstacles:
        if isinstance(obs, Box):
            d = np.maximum(
                np.maximum(obs.lo[None, : pts.shape[1]] - pts, pts - obs.hi[None, : pts.shape[1]]),
                0.0,
            )
            dist = np.sqrt(np.sum(d * d, axis=1))
        elif isinstance(obs, Sphere):
            dist = np.maximum(
                np.linalg.norm(pts - obs.center[None, : pts.shape[1]], axis=1) - obs.radius,
                0.0,
            )
        elif isinstance(obs, Cylinder):
            dr = np.maximum(
                np.hypot(pts[:, 0] - obs.center_xy[0], pts[:, 1] - obs.center_xy[1])
                - obs.radius,
                0.0,
            )
            dz = np.zeros(len(pts))
            if pts.shape[1] > 2:
                dz = np.maximum(np.maximum(obs.z_lo - pts[:, 2], pts[:, 2] - obs.z_hi), 0.0)
            dist = np.hypot(dr, dz)
        else:
            dist = np.array([obs.distance(p) for p in pts])
        if np.any(dist < r):
            return True
    return False


def edge_in_collision(
    scenario: Scenario,
    edge: Edge,
    position_dims: Sequence[int],
    resolution: Optional[float] = None,
) -> bool:
    """Check edge samples, densified so workspace gaps stay below `resolution`."""
    if resolution is None:
        resolution = scenario.robot_radius / 2.0 if scenario.robot_radius > 0 else 0.05
    dims = list(position_dims)
    states = edge.states
    if np.any(states < scenario.bounds_lo[None, :] - 1e-12) or np.any(
        states > scenario.bounds_hi[None, :] + 1e-12
    ):
        return True
    pts = states[:, dims]
    gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    max_gap = float(gaps.max()) if len(gaps) else 0.0
    spacing = max_gap
    if 0.0 < max_gap <= resolution:
        # samples are denser than needed; thin them while keeping the spacing
        # guarantee stride * max_gap <= resolution
        stride = int(resolution / max_gap)
        if stride > 1:
            pts = np.vstack([pts[::stride], pts[-1:]])
            spacing = stride * max_gap
    elif np.any(gaps > resolution):
        # workspace-level linear fill-in between integrator samples
        filled = [pts[:1]]
        for i in range(len(gaps)):
            n = int(math.ceil(gaps[i] / resolution)) if gaps[i] > resolution else 1
            frac = np.arange(1, n + 1)[:, None] / n
            filled.append(pts[i] + (pts[i + 1] - pts[i]) * frac)
        pts = np.vstack(filled)
        spacing = resolution
    # margin makes the check sound for the chords between checked points, so
    # re-checks at any finer resolution cannot find new collisions
    return _points_hit_any(scenario, pts, margin=spacing / 2.0)
