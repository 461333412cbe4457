"""Benchmark harness: scenario files, trial batches, aggregation, sweeps, CSV.

Scenario files are versioned JSON. Batches are reproducible: trial i uses
seed base_seed + i, and with `logical_clock=True` solution times come from a
deterministic counter instead of the wall clock, so repeated runs produce
byte-identical CSV output.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import datetime
import json
import math
import statistics
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from .collision import obstacle_from_dict, obstacle_to_dict, state_in_collision
from .core import AblationFlags, KinoplanError, PlannerConfig, Scenario
from .dynamics import get_system
from .planners import Result, run_planner

SCENARIO_FORMAT_VERSION = 1

CSV_COLUMNS = (
    "trial",
    "seed",
    "planner",
    "system",
    "scenario",
    "success",
    "solution_time_s",
    "iterations",
    "cost",
    "n_forward",
    "n_reverse",
    "r_rk",
    "r_edge",
    "r_x",
    "r_max",
)


class LogicalClock:
    """Deterministic stand-in for the wall clock: each read advances `tick`."""

    def __init__(self, tick: float = 1e-4):
        self.tick = tick
        self.reads = 0

    def __call__(self) -> float:
        self.reads += 1
        return self.reads * self.tick


# --- scenario files -------------------------------------------------------


def _require(payload: dict, key: str, path: str):
    if key not in payload:
        raise KinoplanError(f"scenario field missing: {path}{key}")
    return payload[key]


def scenario_from_dict(payload: dict) -> Scenario:
    version = payload.get("format_version")
    if version != SCENARIO_FORMAT_VERSION:
        raise KinoplanError(f"unsupported scenario format_version: {version!r}")
    system = _require(payload, "system", "")
    model = get_system(system)
    arrays = {}
    for key in ("bounds_lo", "bounds_hi", "start", "goal", "goal_region"):
        raw = _require(payload, key, "")
        if key == "goal_region":
            # null means an unconstrained dimension
            raw = [math.inf if v is None else v for v in raw]
        value = np.asarray(raw, dtype=float)
        if value.shape != (model.state_dim,):
            raise KinoplanError(
                f"scenario field {key}: expected {model.state_dim} numbers, got shape {value.shape}"
            )
        arrays[key] = value
    obstacles = []
    for i, od in enumerate(payload.get("obstacles", [])):
        try:
            obstacles.append(obstacle_from_dict(od))
        except (KinoplanError, KeyError, TypeError, ValueError) as exc:
            raise KinoplanError(f"scenario field obstacles[{i}]: {exc}") from exc
    return Scenario(
        system=system,
        bounds_lo=arrays["bounds_lo"],
        bounds_hi=arrays["bounds_hi"],
        start=arrays["start"],
        goal=arrays["goal"],
        goal_region=arrays["goal_region"],
        obstacles=obstacles,
        robot_radius=float(payload.get("robot_radius", 0.0)),
        name=str(payload.get("name", "scenario")),
    )


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "format_version": SCENARIO_FORMAT_VERSION,
        "name": s.name,
        "system": s.system,
        "bounds_lo": s.bounds_lo.tolist(),
        "bounds_hi": s.bounds_hi.tolist(),
        "start": s.start.tolist(),
        "goal": s.goal.tolist(),
        "goal_region": [None if math.isinf(v) else v for v in s.goal_region.tolist()],
        "robot_radius": s.robot_radius,
        "obstacles": [obstacle_to_dict(o) for o in s.obstacles],
    }


def load_scenario(path: str) -> Scenario:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise KinoplanError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(payload)


def save_scenario(path: str, scenario: Scenario) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")


# --- trial batches ----------------------------------------------------------


@dataclass
class TrialRecord:
    trial: int
    seed: int
    planner: str
    system: str
    scenario: str
    success: bool
    solution_time_s: float
    iterations: int
    cost: float
    n_forward: int
    n_reverse: int
    r_rk: float
    r_edge: float
    r_x: float
    r_max: float

    def row(self) -> List[str]:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        if math.isnan(value):
            return "nan"
        return format(value, ".9g")
    return str(value)


def record_from_result(
    result: Result, trial: int, seed: int, scenario_name: str, system: str
) -> TrialRecord:
    return TrialRecord(
        trial=trial,
        seed=seed,
        planner=result.algorithm,
        system=system,
        scenario=scenario_name,
        success=result.success,
        solution_time_s=result.solution_time_s,
        iterations=result.iterations,
        cost=result.cost,
        n_forward=result.n_forward,
        n_reverse=result.n_reverse,
        r_rk=result.r_rk,
        r_edge=result.r_edge,
        r_x=result.r_x,
        r_max=result.r_max,
    )


def _randomized_endpoints(scenario: Scenario, seed: int) -> Scenario:
    """Resample start and goal positions until both are collision free."""
    model = get_system(scenario.system)
    rng = np.random.default_rng(seed)
    out = {}
    for key, base in (("start", scenario.start), ("goal", scenario.goal)):
        for _ in range(10_000):
            cand = base.copy()
            for d in model.position_dims:
                cand[d] = rng.uniform(scenario.bounds_lo[d], scenario.bounds_hi[d])
            if not state_in_collision(scenario, cand, model.position_dims):
                out[key] = cand
                break
        else:
            raise KinoplanError(f"could not sample a collision-free {key}")
    return replace(scenario, start=out["start"], goal=out["goal"])


def _run_trial(args) -> TrialRecord:
    scenario, config, algorithm, trial, seed, logical = args
    clock = LogicalClock() if logical else None
    result = run_planner(scenario, replace(config, seed=seed), algorithm, clock=clock)
    return record_from_result(result, trial, seed, scenario.name, scenario.system)


def run_batch(
    scenario: Scenario,
    config: PlannerConfig,
    algorithm: str,
    trials: int,
    base_seed: int = 0,
    logical_clock: bool = False,
    randomize_endpoints: bool = False,
    workers: int = 1,
) -> List[TrialRecord]:
    jobs = []
    for i in range(trials):
        seed = base_seed + i
        sc = _randomized_endpoints(scenario, seed) if randomize_endpoints else scenario
        jobs.append((sc, config, algorithm, i, seed, logical_clock))
    if workers <= 1:
        return [_run_trial(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_trial, jobs))


def aggregate(records: Sequence[TrialRecord], s_max: float) -> Dict[str, float]:
    """Summary statistics; failed trials contribute s_max as their solve time."""
    if not records:
        raise KinoplanError("cannot aggregate an empty batch")
    times = [r.solution_time_s if r.success else s_max for r in records]
    costs = [r.cost for r in records if r.success]
    n = len(records)
    mean_t = statistics.fmean(times)
    return {
        "trials": float(n),
        "success_rate": sum(r.success for r in records) / n,
        "time_mean": mean_t,
        "time_median": statistics.median(times),
        "time_se": statistics.stdev(times) / math.sqrt(n) if n > 1 else 0.0,
        "cost_median": statistics.median(costs) if costs else math.inf,
    }


# --- parameter sweeps --------------------------------------------------------

SWEEP_AXES = {
    # axis name -> (config field, scale) used when rendering sweep heatmaps
    "delta_hr": ("delta_hr", "log"),
    "n_best": ("n_best", "log"),
    "q": ("q", "linear"),
}


def sweep(
    scenario: Scenario,
    config: PlannerConfig,
    algorithm: str,
    axis: str,
    values: Sequence,
    trials: int,
    base_seed: int = 0,
    constant_radius: bool = False,
    logical_clock: bool = False,
    workers: int = 1,
) -> List[dict]:
    if axis not in SWEEP_AXES:
        raise KinoplanError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    fname, scale = SWEEP_AXES[axis]
    rows = []
    for value in values:
        cfg = replace(config, **{fname: value}, constant_radius=constant_radius)
        records = run_batch(
            scenario, cfg, algorithm, trials, base_seed,
            logical_clock=logical_clock, workers=workers,
        )
        stats = aggregate(records, cfg.s_max)
        rows.append({"axis": axis, "scale": scale, "value": value, **stats})
    return rows


# --- CSV output ---------------------------------------------------------------


def write_csv(path: str, records: Sequence[TrialRecord], timestamp: bool = True) -> None:
    lines = []
    if timestamp:
        now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        lines.append(f"# generated {now}")
    lines.append(",".join(CSV_COLUMNS))
    for r in records:
        lines.append(",".join(r.row()))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(path: str, rows: Sequence[dict], timestamp: bool = True) -> None:
    if not rows:
        raise KinoplanError("no sweep rows to write")
    columns = list(rows[0].keys())
    lines = []
    if timestamp:
        now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        lines.append(f"# generated {now}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
