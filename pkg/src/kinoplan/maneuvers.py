"""Precomputed maneuver template libraries for the two maneuver-based systems.

A template is a short trajectory expressed in a local frame, starting and
ending at zero velocity so that templates chain without dynamic mismatch.
Unicycle templates are constant-curvature arcs with a trapezoidal speed
profile; quadrotor templates are straight segments with a cosine speed
profile. Both are rigid-transform invariant, so path cost is precomputed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .core import Edge, FORWARD, KinoplanError, PropagationError, REVERSE, wrap_angle
from .metrics import DistanceSpec, distance_many, samples_cost

LIBRARY_FORMAT_VERSION = 1
TEMPLATE_STEP = 0.005

# Unicycle profile shape: ramp acceleration and cruise time at peak speed.
UNI_ACCEL = 2.5
UNI_CRUISE = 0.5
UNI_SPEEDS = (1.0, 1.5, 2.0, 2.5, 3.0)
UNI_TURN_RATES = tuple(i * math.pi / 18.0 for i in range(10))  # 0 .. pi/2

QUAD_DISTANCES = (1.0, 2.0, 3.0, 4.0, 5.0)
QUAD_HEADING_STEP_DEG = 20.0
QUAD_CLIMBS_DEG = (-30.0, 0.0, 30.0)


@dataclass
class ManeuverTemplate:
    """One local-frame trajectory, sampled at TEMPLATE_STEP."""

    times: np.ndarray
    states: np.ndarray
    duration: float
    cost: float
    params: dict


def _trapezoid_arclength(peak: float, t: np.ndarray, ramp: float, cruise: float) -> np.ndarray:
    """Distance traveled under a trapezoidal speed profile at times t."""
    a = UNI_ACCEL
    s = np.empty_like(t)
    t1, t2 = ramp, ramp + cruise
    for i, ti in enumerate(t):
        if ti <= t1:
            s[i] = 0.5 * a * ti * ti
        elif ti <= t2:
            s[i] = 0.5 * a * ramp * ramp + peak * (ti - t1)
        else:
            td = ti - t2
            s[i] = 0.5 * a * ramp * ramp + peak * cruise + peak * td - 0.5 * a * td * td
    return s


def _unicycle_template(peak: float, turn_rate: float, sv: float, sw: float) -> ManeuverTemplate:
    """Constant-curvature arc; signs sv/sw choose driving and turning direction."""
    ramp = peak / UNI_ACCEL
    duration = 2.0 * ramp + UNI_CRUISE
    n = int(round(duration / TEMPLATE_STEP))
    t = np.linspace(0.0, duration, n + 1)
    s = sv * _trapezoid_arclength(peak, t, ramp, UNI_CRUISE)
    kappa = sw * turn_rate / peak
    if abs(kappa) < 1e-12:
        x, y, th = s, np.zeros_like(s), np.zeros_like(s)
    else:
        th = kappa * s
        x = np.sin(th) / kappa
        y = (1.0 - np.cos(th)) / kappa
    states = np.column_stack([x, y, th])
    cost = float(np.sum(np.hypot(np.diff(x), np.diff(y))))
    return ManeuverTemplate(
        times=t,
        states=states,
        duration=duration,
        cost=cost,
        params={"peak": peak, "turn_rate": turn_rate, "sv": sv, "sw": sw},
    )


def _quadrotor_template(dist: float, heading: float, climb: float) -> ManeuverTemplate:
    """Straight segment with a cosine speed bump, zero speed at both ends."""
    duration = dist  # peak speed 2*dist/duration = 2 m/s, inside control bounds
    n = int(round(duration / TEMPLATE_STEP))
    t = np.linspace(0.0, duration, n + 1)
    # arclength of v(t) = v_peak*(1-cos(2*pi*t/T))/2
    s = dist * (t / duration - np.sin(2.0 * math.pi * t / duration) / (2.0 * math.pi))
    d = np.array(
        [
            math.cos(climb) * math.cos(heading),
            math.cos(climb) * math.sin(heading),
            math.sin(climb),
        ]
    )
    states = s[:, None] * d[None, :]
    return ManeuverTemplate(
        times=t,
        states=states,
        duration=duration,
        cost=dist,
        params={"dist": dist, "heading": heading, "climb": climb},
    )


class ManeuverLibrary:
    """Template set plus vectorized best-template queries and edge assembly."""

    def __init__(self, system: str, templates: List[ManeuverTemplate]):
        if not templates:
            raise KinoplanError("maneuver library needs at least one template")
        self.system = system
        self.templates = templates
        self.finals = np.array([tp.states[-1] for tp in templates])
        self.costs = np.array([tp.cost for tp in templates])

    def __len__(self) -> int:
        return len(self.templates)

    def candidate_endpoints(self, anchor: np.ndarray, direction: str) -> np.ndarray:
        """World-frame free endpoint of every template applied at `anchor`.

        Forward edges start at the anchor and the free endpoint is the final
        state; reverse edges end at the anchor and the free endpoint is where
        the template would have started.
        """
        if self.system == "quadrotor":
            if direction == FORWARD:
                return anchor[None, :] + self.finals
            return anchor[None, :] - self.finals
        # unicycle: SE(2) transform per template
        fx, fy, fth = self.finals[:, 0], self.finals[:, 1], self.finals[:, 2]
        if direction == FORWARD:
            phi = anchor[2]
            c, s = math.cos(phi), math.sin(phi)
            x = anchor[0] + c * fx - s * fy
            y = anchor[1] + s * fx + c * fy
            th = wrap_angle(phi + fth)
            return np.column_stack([x, y, th])
        phi = anchor[2] - fth  # rotate so the template final heading hits the anchor
        c, s = np.cos(phi), np.sin(phi)
        x = anchor[0] - (c * fx - s * fy)
        y = anchor[1] - (s * fx + c * fy)
        th = wrap_angle(phi)
        return np.column_stack([x, y, th])

    def best_template(
        self,
        anchor: np.ndarray,
        target: np.ndarray,
        spec: DistanceSpec,
        direction: str,
        subset: Optional[np.ndarray] = None,
    ) -> int:
        """Index of the candidate template whose free endpoint lands closest to
        `target`; `subset` restricts the candidates (random best-input draws)."""
        ends = self.candidate_endpoints(anchor, direction)
        if subset is None:
            return int(np.argmin(distance_many(spec, ends, target)))
        return int(subset[np.argmin(distance_many(spec, ends[subset], target))])

    def make_edge(self, idx: int, anchor: np.ndarray, direction: str) -> Edge:
        """Instantiate template `idx` at `anchor` as a world-frame edge."""
        tp = self.templates[idx]
        if self.system == "quadrotor":
            if direction == FORWARD:
                states = tp.states + anchor[None, :]
            else:
                states = tp.states + (anchor - tp.states[-1])[None, :]
        else:
            if direction == FORWARD:
                phi, tx, ty = anchor[2], anchor[0], anchor[1]
            else:
                phi = anchor[2] - tp.states[-1, 2]
                c, s = math.cos(phi), math.sin(phi)
                fx, fy = tp.states[-1, 0], tp.states[-1, 1]
                tx = anchor[0] - (c * fx - s * fy)
                ty = anchor[1] - (s * fx + c * fy)
            c, s = math.cos(phi), math.sin(phi)
            x = tx + c * tp.states[:, 0] - s * tp.states[:, 1]
            y = ty + s * tp.states[:, 0] + c * tp.states[:, 1]
            th = wrap_angle(phi + tp.states[:, 2])
            states = np.column_stack([x, y, th])
        return Edge(
            times=tp.times.copy(),
            states=states,
            control=None,
            duration=tp.duration,
            cost=tp.cost,
            direction=direction,
            truncated=False,
            maneuver_id=idx,
        )

    def random_template(self, rng: np.random.Generator) -> int:
        return int(rng.integers(0, len(self.templates)))

    def validate(self, spec: DistanceSpec, atol: float = 1e-9) -> None:
        """Check library invariants: zero end speeds and consistent costs."""
        for i, tp in enumerate(self.templates):
            v0 = np.linalg.norm(tp.states[1] - tp.states[0]) / (tp.times[1] - tp.times[0])
            v1 = np.linalg.norm(tp.states[-1] - tp.states[-2]) / (
                tp.times[-1] - tp.times[-2]
            )
            # cosine/trapezoid profiles start and stop at rest; allow one step of drift
            vcap = UNI_ACCEL * TEMPLATE_STEP + 1e-6
            if v0 > vcap or v1 > vcap:
                raise KinoplanError(f"template {i} does not start and end at rest")
            if not (tp.cost > 0.0):
                raise KinoplanError(f"template {i} has non-positive cost")
            recomputed = samples_cost(spec, tp.states)
            if abs(recomputed - tp.cost) > max(atol, 1e-6 * tp.cost):
                raise KinoplanError(f"template {i} cost mismatch")


def build_library(system: str) -> ManeuverLibrary:
    if system == "unicycle":
        templates = []
        for peak in UNI_SPEEDS:
            for rate in UNI_TURN_RATES:
                combos = [(1.0, 1.0), (-1.0, 1.0)] if rate == 0.0 else [
                    (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)
                ]
                for sv, sw in combos:
                    templates.append(_unicycle_template(peak, rate, sv, sw))
        return ManeuverLibrary(system, templates)
    if system == "quadrotor":
        templates = []
        headings = np.deg2rad(np.arange(0.0, 360.0, QUAD_HEADING_STEP_DEG))
        for dist in QUAD_DISTANCES:
            for heading in headings:
                for climb_deg in QUAD_CLIMBS_DEG:
                    templates.append(
                        _quadrotor_template(dist, float(heading), math.radians(climb_deg))
                    )
        return ManeuverLibrary(system, templates)
    raise PropagationError(f"no maneuver library for system {system!r}")


def save_library_spec(path: str, system: str) -> None:
    """Write the generation recipe; templates are rebuilt deterministically."""
    payload = {
        "format_version": LIBRARY_FORMAT_VERSION,
        "system": system,
        "step": TEMPLATE_STEP,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_library(path: str) -> ManeuverLibrary:
    with open(path) as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != LIBRARY_FORMAT_VERSION:
        raise KinoplanError(
            f"unsupported maneuver library format_version {version!r}"
        )
    return build_library(payload["system"])


_CACHE: dict = {}


def get_library(system: str) -> ManeuverLibrary:
    if system not in _CACHE:
        _CACHE[system] = build_library(system)
    return _CACHE[system]
