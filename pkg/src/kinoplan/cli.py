"""Command line interface.

Exit codes: 0 success, 2 validation error (bad arguments, malformed files,
invalid paths), 3 I/O error.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys

import click
import numpy as np

from .bench import (
    aggregate,
    load_scenario,
    run_batch,
    sweep as run_sweep,
    write_csv,
    write_sweep_csv,
)
from .core import AblationFlags, KinoplanError, PlannerConfig
from .dynamics import get_system
from .planners import ALGORITHMS, PlannerRun, validate_path
from .render import render_sweep, render_time_histogram, render_trees

EXIT_VALIDATION = 2
EXIT_IO = 3

CONFIG_FIELDS = {
    "delta_hr", "q", "n_best", "gamma", "radius_exponent", "t_max",
    "m_iter", "s_max", "step", "epsilon_nd", "goal_bias", "constant_radius",
}


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path, system, ablation_names) -> PlannerConfig:
    model = get_system(system)
    values = {
        "delta_hr": model.delta_hr,
        "q": model.q,
        "n_best": model.n_best,
        "gamma": model.gamma,
        "t_max": model.t_max,
    }
    if path is not None:
        try:
            with open(path) as fh:
                overrides = json.load(fh)
        except OSError as exc:
            _fail(EXIT_IO, f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            _fail(EXIT_VALIDATION, f"config file is not valid JSON: {exc}")
        unknown = set(overrides) - CONFIG_FIELDS
        if unknown:
            _fail(EXIT_VALIDATION, f"unknown config fields: {sorted(unknown)}")
        values.update(overrides)
    try:
        return PlannerConfig(
            **values, ablations=AblationFlags.from_names(ablation_names)
        )
    except KinoplanError as exc:
        _fail(EXIT_VALIDATION, str(exc))


def _load_scenario_or_fail(path):
    try:
        return load_scenario(path)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read scenario file: {exc}")
    except KinoplanError as exc:
        _fail(EXIT_VALIDATION, str(exc))


def _ensure_outdir(out):
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot create output directory: {exc}")


@click.group()
def main():
    """Kinodynamic motion planning benchmarks."""


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--planner", required=True, type=click.Choice(ALGORITHMS))
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--trials", default=1, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--no-timestamp", is_flag=True, help="omit the generated-at CSV comment")
@click.option("--logical-clock", is_flag=True, help="deterministic solve times")
@click.option("--randomize-endpoints", is_flag=True)
@click.option("--workers", default=1, show_default=True, type=int)
@click.option("--ablation", multiple=True, help="ablation flag name; repeatable")
def run(scenario_path, planner, config_path, trials, seed, out, no_timestamp,
        logical_clock, randomize_endpoints, workers, ablation):
    """Run a batch of planning trials and write results.csv plus a figure."""
    if trials < 1:
        _fail(EXIT_VALIDATION, f"--trials must be >= 1, got {trials}")
    scenario = _load_scenario_or_fail(scenario_path)
    config = _load_config(config_path, scenario.system, ablation)
    _ensure_outdir(out)
    try:
        records = run_batch(
            scenario, config, planner, trials, seed,
            logical_clock=logical_clock,
            randomize_endpoints=randomize_endpoints,
            workers=workers,
        )
    except KinoplanError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    try:
        write_csv(os.path.join(out, "results.csv"), records, timestamp=not no_timestamp)
        render_time_histogram(
            os.path.join(out, "times.svg"), records, config.s_max,
            title=f"{planner} on {scenario.name}",
        )
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write results: {exc}")
    stats = aggregate(records, config.s_max)
    click.echo(
        f"{planner} {scenario.name}: success {stats['success_rate']:.0%}, "
        f"median time {stats['time_median']:.3f}s over {trials} trials"
    )


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--planner", required=True, type=click.Choice(ALGORITHMS))
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--axis", required=True, type=click.Choice(["delta_hr", "n_best", "q"]))
@click.option("--values", required=True, help="comma-separated parameter values")
@click.option("--trials", default=10, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--no-timestamp", is_flag=True)
@click.option("--constant-radius", is_flag=True, help="hold the coupling radius fixed")
@click.option("--logical-clock", is_flag=True)
@click.option("--workers", default=1, show_default=True, type=int)
def sweep(scenario_path, planner, config_path, axis, values, trials, seed, out,
          no_timestamp, constant_radius, logical_clock, workers):
    """Sweep one parameter and plot median solve time against it."""
    scenario = _load_scenario_or_fail(scenario_path)
    config = _load_config(config_path, scenario.system, ())
    try:
        parsed = [int(v) if axis == "n_best" else float(v) for v in values.split(",")]
    except ValueError as exc:
        _fail(EXIT_VALIDATION, f"bad --values: {exc}")
    _ensure_outdir(out)
    try:
        rows = run_sweep(
            scenario, config, planner, axis, parsed, trials, seed,
            constant_radius=constant_radius, logical_clock=logical_clock,
            workers=workers,
        )
    except KinoplanError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    try:
        write_sweep_csv(os.path.join(out, "sweep.csv"), rows, timestamp=not no_timestamp)
        render_sweep(os.path.join(out, "sweep.svg"), rows, title=f"{planner}: {axis}")
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write sweep results: {exc}")
    click.echo(f"swept {axis} over {len(parsed)} values, {trials} trials each")


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--planner", required=True, type=click.Choice(ALGORITHMS))
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path())
def render(scenario_path, planner, config_path, seed, out):
    """Run one trial and render the search trees and solution path."""
    scenario = _load_scenario_or_fail(scenario_path)
    config = _load_config(config_path, scenario.system, ())
    _ensure_outdir(out)
    try:
        run = PlannerRun(scenario, dataclasses.replace(config, seed=seed), planner)
        result = run.run()
    except KinoplanError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    try:
        render_trees(
            os.path.join(out, "trees.svg"), scenario,
            fwd=run.fwd, rev=run.rev, solution=result.path,
            title=f"{planner} on {scenario.name} (seed {seed})",
        )
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write figure: {exc}")
    status = f"solved in {result.solution_time_s:.3f}s" if result.success else "no solution"
    click.echo(f"{planner} on {scenario.name}: {status}")


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--planner", required=True, type=click.Choice(ALGORITHMS))
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
def validate(scenario_path, planner, config_path, seed):
    """Run one trial and audit the returned path for feasibility."""
    scenario = _load_scenario_or_fail(scenario_path)
    config = _load_config(config_path, scenario.system, ())
    try:
        result = PlannerRun(
            scenario, dataclasses.replace(config, seed=seed), planner
        ).run()
    except KinoplanError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    if not result.success:
        _fail(EXIT_VALIDATION, "planner found no solution to validate")
    problems = validate_path(scenario, result.path)
    if problems:
        for p in problems:
            click.echo(f"invalid: {p}", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(f"path valid: cost {result.path.cost:.3f}, {len(result.path.edges)} edges")


if __name__ == "__main__":
    main()
