"""System models (six vehicles), RK4 propagation, and random control sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    ANGULAR,
    LINEAR,
    Edge,
    FORWARD,
    PropagationError,
    REVERSE,
    wrap_state,
)
from .metrics import DistanceSpec, nd_variant, samples_cost

# Cart-pole physical constants (cart mass, pole mass, half-ish length, inertia).
CARTPOLE_M = 1.0
CARTPOLE_m = 0.3
CARTPOLE_L = 0.5
CARTPOLE_I = CARTPOLE_m * CARTPOLE_L**2 / 3.0
GRAVITY = 9.81

# Treaded vehicle: kinematic skid-steer mapping with track width W.
TREADED_W = 1.0

# Fixed-wing aero model: first-order actuator lags, linear lift, quadratic drag.
FW_C_T = 1.0
FW_C_ALPHA = 2.0
FW_C_MU = 2.0
FW_K = 0.05  # scaled inverse wing loading
FW_CL0 = 0.2
FW_CL_ALPHA = 5.0
FW_CD0 = 0.02
FW_CD_KAPPA = 0.05


@dataclass(frozen=True)
class SystemModel:
    name: str
    state_dim: int
    control_dim: int
    kinds: tuple
    control_lo: np.ndarray
    control_hi: np.ndarray
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    position_dims: tuple
    dist_weights: np.ndarray
    dist_kinds: tuple
    nd_zero_features: tuple  # feature indices dropped in the no-dynamics variant
    embed: Optional[Callable[[np.ndarray], np.ndarray]] = None
    uses_maneuvers: bool = False
    default_bounds_lo: Optional[np.ndarray] = None
    default_bounds_hi: Optional[np.ndarray] = None
    # Per-system planner defaults: delta_hr, n_best, q, gamma.
    delta_hr: float = 7.0
    n_best: int = 40
    q: float = 0.8
    gamma: float = 14.0
    t_max: float = 2.0

    def distance_spec(self) -> DistanceSpec:
        return DistanceSpec(
            weights=self.dist_weights,
            kinds=self.dist_kinds,
            label="full",
            embed=self.embed,
            state_dim=self.state_dim if self.embed is not None else None,
        )

    def nd_distance_spec(self) -> DistanceSpec:
        return nd_variant(self.distance_spec(), self.nd_zero_features)

    def wrap(self, state: np.ndarray) -> np.ndarray:
        return wrap_state(state, self.kinds)


def _f_unicycle(x, u):
    th = x[2]
    return np.array([u[0] * math.cos(th), u[0] * math.sin(th), u[1]])


def _f_quadrotor(x, u):
    # Kinematic quadrotor: planned in position space with velocity controls.
    return np.array([u[0], u[1], u[2]])


def _f_cartpole(x, u):
    _, th, v, w = x
    F = u[0]
    mL = CARTPOLE_m * CARTPOLE_L
    I_mL2 = CARTPOLE_I + CARTPOLE_m * CARTPOLE_L**2
    sin_t = math.sin(th)
    cos_t = math.cos(th)
    denom = (CARTPOLE_M + CARTPOLE_m) * I_mL2 - (mL * cos_t) ** 2
    thrust = F + mL * w * w * sin_t
    v_dot = (I_mL2 * thrust + (mL**2) * cos_t * sin_t * GRAVITY) / denom
    w_dot = (-mL * cos_t * thrust + (CARTPOLE_M + CARTPOLE_m) * (-GRAVITY * mL * sin_t)) / denom
    return np.array([v, w, v_dot, w_dot])


def _f_treaded(x, u):
    th, vl, vr = x[2], x[3], x[4]
    vx = 0.5 * (vl + vr)
    wz = (vr - vl) / TREADED_W
    return np.array([vx * math.cos(th), vx * math.sin(th), wz, u[0], u[1]])


def _f_car_trailer(x, u):
    th, v, w, th1 = x[2], x[3], x[4], x[5]
    return np.array(
        [
            v * math.cos(th) * math.cos(w),
            v * math.sin(th) * math.cos(w),
            v * math.sin(w),
            u[0],
            u[1],
            v * math.sin(th - th1),
        ]
    )


def _f_fixed_wing(x, u):
    v, w, b, T, a, mu = x[3], x[4], x[5], x[6], x[7], x[8]
    cl = FW_CL0 + FW_CL_ALPHA * a
    cd = FW_CD0 + FW_CD_KAPPA * cl * cl
    lift = T * math.sin(a) / v + FW_K * v * cl
    return np.array(
        [
            v * math.cos(w) * math.cos(b),
            v * math.cos(w) * math.sin(b),
            v * math.sin(w),
            T * math.cos(a) - FW_K * v * v * cd - GRAVITY * math.sin(w),
            lift * math.cos(mu) - GRAVITY * math.cos(w) / v,
            lift * math.sin(mu) / math.cos(w),
            FW_C_T * (u[0] - T),
            FW_C_ALPHA * (u[1] - a),
            FW_C_MU * (u[2] - mu),
        ]
    )


def _fw_embed(state: np.ndarray) -> np.ndarray:
    """Fixed-wing distance features: position plus Cartesian velocity."""
    x, y, z, v, w, b = state[0], state[1], state[2], state[3], state[4], state[5]
    cw = math.cos(w)
    return np.array([x, y, z, v * cw * math.cos(b), v * cw * math.sin(b), v * math.sin(w)])


def _build_systems() -> dict:
    systems = {}
    systems["unicycle"] = SystemModel(
        name="unicycle",
        state_dim=3,
        control_dim=2,
        kinds=(LINEAR, LINEAR, ANGULAR),
        control_lo=np.array([-5.0, -math.pi / 2]),
        control_hi=np.array([5.0, math.pi / 2]),
        f=_f_unicycle,
        position_dims=(0, 1),
        dist_weights=np.array([1.0, 1.0, 0.0]),
        dist_kinds=(LINEAR, LINEAR, ANGULAR),
        nd_zero_features=(),
        uses_maneuvers=True,
        default_bounds_lo=np.array([0.0, 0.0, -math.pi]),
        default_bounds_hi=np.array([100.0, 100.0, math.pi]),
        delta_hr=7.0,
        n_best=40,
        q=0.8,
        gamma=14.0,
        t_max=2.0,
    )
    systems["quadrotor"] = SystemModel(
        name="quadrotor",
        state_dim=3,
        control_dim=3,
        kinds=(LINEAR, LINEAR, LINEAR),
        control_lo=np.array([-3.0, -3.0, -3.0]),
        control_hi=np.array([3.0, 3.0, 3.0]),
        f=_f_quadrotor,
        position_dims=(0, 1, 2),
        dist_weights=np.array([1.0, 1.0, 1.0]),
        dist_kinds=(LINEAR, LINEAR, LINEAR),
        nd_zero_features=(),
        uses_maneuvers=True,
        default_bounds_lo=np.array([0.0, 0.0, 0.0]),
        default_bounds_hi=np.array([100.0, 100.0, 20.0]),
        delta_hr=8.0,
        n_best=90,
        q=0.8,
        gamma=16.0,
        t_max=2.0,
    )
    systems["cartpole"] = SystemModel(
        name="cartpole",
        state_dim=4,
        control_dim=1,
        kinds=(LINEAR, ANGULAR, LINEAR, LINEAR),
        control_lo=np.array([-15.0]),
        control_hi=np.array([15.0]),
        f=_f_cartpole,
        position_dims=(0,),
        dist_weights=np.array([1.0, 1.5, 1.0, 1.0]),
        dist_kinds=(LINEAR, ANGULAR, LINEAR, LINEAR),
        nd_zero_features=(2, 3),
        default_bounds_lo=np.array([-30.0, -math.pi, -10.0, -10.0]),
        default_bounds_hi=np.array([30.0, math.pi, 10.0, 10.0]),
        delta_hr=6.0,
        n_best=7,
        q=0.7,
        gamma=10.0,
        t_max=1.0,
    )
    systems["treaded"] = SystemModel(
        name="treaded",
        state_dim=5,
        control_dim=2,
        kinds=(LINEAR, LINEAR, ANGULAR, LINEAR, LINEAR),
        control_lo=np.array([-2.0, -2.0]),
        control_hi=np.array([2.0, 2.0]),
        f=_f_treaded,
        position_dims=(0, 1),
        dist_weights=np.array([1.0, 1.0, 0.0, 0.25, 0.25]),
        dist_kinds=(LINEAR, LINEAR, ANGULAR, LINEAR, LINEAR),
        nd_zero_features=(3, 4),
        default_bounds_lo=np.array([0.0, 0.0, -math.pi, -3.0, -3.0]),
        default_bounds_hi=np.array([25.0, 25.0, math.pi, 3.0, 3.0]),
        delta_hr=3.0,
        n_best=7,
        q=0.7,
        gamma=7.0,
        t_max=1.0,
    )
    systems["car_trailer"] = SystemModel(
        name="car_trailer",
        state_dim=6,
        control_dim=2,
        kinds=(LINEAR, LINEAR, ANGULAR, LINEAR, LINEAR, ANGULAR),
        control_lo=np.array([-2.0, -1.0]),
        control_hi=np.array([2.0, 1.0]),
        f=_f_car_trailer,
        position_dims=(0, 1),
        dist_weights=np.array([1.0, 1.0, 0.0, 0.25, 0.0, 0.0]),
        dist_kinds=(LINEAR, LINEAR, ANGULAR, LINEAR, LINEAR, ANGULAR),
        nd_zero_features=(3,),
        default_bounds_lo=np.array([0.0, 0.0, -math.pi, -3.0, -1.0, -math.pi]),
        default_bounds_hi=np.array([20.0, 20.0, math.pi, 3.0, 1.0, math.pi]),
        delta_hr=4.0,
        n_best=7,
        q=0.7,
        gamma=8.0,
        t_max=1.0,
    )
    systems["fixed_wing"] = SystemModel(
        name="fixed_wing",
        state_dim=9,
        control_dim=3,
        kinds=(
            LINEAR, LINEAR, LINEAR,  # x, y, z
            LINEAR,                  # speed v
            LINEAR,                  # flight path angle (physically |w| < pi/2)
            ANGULAR,                 # heading
            LINEAR, LINEAR, LINEAR,  # thrust, angle of attack, roll
        ),
        control_lo=np.array([0.0, -0.2, -1.0]),
        control_hi=np.array([15.0, 0.4, 1.0]),
        f=_f_fixed_wing,
        position_dims=(0, 1, 2),
        dist_weights=np.array([1.0, 1.0, 1.0, 0.9, 0.9, 0.9]),
        dist_kinds=(LINEAR,) * 6,
        nd_zero_features=(3, 4, 5),
        embed=_fw_embed,
        default_bounds_lo=np.array(
            [0.0, 0.0, 0.0, 4.0, -1.0, -math.pi, 0.0, -0.2, -1.2]
        ),
        default_bounds_hi=np.array(
            [60.0, 60.0, 30.0, 25.0, 1.0, math.pi, 15.0, 0.4, 1.2]
        ),
        delta_hr=6.0,
        n_best=7,
        q=0.7,
        gamma=10.0,
        t_max=1.0,
    )
    return systems


SYSTEMS = _build_systems()


def get_system(name: str) -> SystemModel:
    if name not in SYSTEMS:
        raise PropagationError(f"unknown system {name!r}; known: {sorted(SYSTEMS)}")
    return SYSTEMS[name]


def _rk4_step(f, x: np.ndarray, u: np.ndarray, h: float) -> np.ndarray:
    k1 = f(x, u)
    k2 = f(x + 0.5 * h * k1, u)
    k3 = f(x + 0.5 * h * k2, u)
    k4 = f(x + h * k3, u)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagate(
    model: SystemModel,
    x0: np.ndarray,
    u: np.ndarray,
    t: float,
    h: float = 1e-3,
    direction: str = FORWARD,
    bounds: Optional[tuple] = None,
    spec: Optional[DistanceSpec] = None,
) -> Optional[Edge]:
    """Integrate constant control `u` for duration `t` with fixed step `h`.

    Forward edges start at x0; backward edges END at x0 (time axis still runs
    0..duration). If the trajectory leaves the bounds box, the in-bounds
    prefix (in propagation order) is kept; returns None if nothing survives.
    """
    if not (0.0 < t):
        raise PropagationError(f"duration must be positive, got {t}")
    if not (0.0 < h):
        raise PropagationError(f"step must be positive, got {h}")
    x0 = model.wrap(np.asarray(x0, dtype=float))
    u = np.asarray(u, dtype=float)
    n_full = int(t / h)
    rem = t - n_full * h
    steps = [h] * n_full
    if rem > 1e-12:
        steps.append(rem)
    lo, hi = (None, None) if bounds is None else bounds
    sign = 1.0 if direction == FORWARD else -1.0
    states = [x0]
    times = [0.0]
    x = x0
    elapsed = 0.0
    for dt in steps:
        x = _rk4_step(model.f, x, u, sign * dt)
        if not np.all(np.isfinite(x)):
            raise PropagationError(f"non-finite state during {model.name} propagation")
        x = model.wrap(x)
        if lo is not None and (np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12)):
            break
        elapsed += dt
        states.append(x)
        times.append(elapsed)
    if len(states) < 2:
        return None
    truncated = len(states) < len(steps) + 1
    states_arr = np.array(states)
    times_arr = np.array(times)
    if direction == REVERSE:
        # Samples were produced backwards in time; flip so the final state is x0.
        states_arr = states_arr[::-1].copy()
        times_arr = elapsed - times_arr[::-1]
    cost = samples_cost(spec, states_arr) if spec is not None else float("nan")
    return Edge(
        times=times_arr,
        states=states_arr,
        control=u.copy(),
        duration=float(elapsed),
        cost=cost,
        direction=direction,
        truncated=truncated,
    )


def sample_control(model: SystemModel, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(model.control_lo, model.control_hi)


def sample_duration(rng: np.random.Generator, t_max: float, h: float = 1e-3) -> float:
    """Uniform on (0, t_max], rounded up to a whole number of integrator steps."""
    if t_max <= 0:
        raise PropagationError(f"t_max must be positive, got {t_max}")
    raw = rng.uniform(0.0, t_max)
    n = max(1, math.ceil(raw / h - 1e-12))
    return min(n * h, t_max)
