"""Unit tests for the benchmark harness: scenario files, batches, CSV."""

import json
import math

import numpy as np
import pytest

from kinoplan.bench import (
    LogicalClock,
    aggregate,
    load_scenario,
    run_batch,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    sweep,
    write_csv,
    write_sweep_csv,
)
from kinoplan.collision import Box
from kinoplan.core import KinoplanError, PlannerConfig, Scenario
from kinoplan.dynamics import get_system


def tiny_scenario():
    return Scenario(
        system="unicycle",
        bounds_lo=np.array([0.0, 0.0, -np.pi]),
        bounds_hi=np.array([30.0, 30.0, np.pi]),
        start=np.array([4.0, 4.0, 0.0]),
        goal=np.array([25.0, 25.0, 0.0]),
        goal_region=np.array([2.0, 2.0, np.inf]),
        obstacles=[Box(lo=np.array([12.0, 0.0]), hi=np.array([14.0, 20.0]))],
        robot_radius=0.5,
        name="tiny",
    )


def tiny_config(**kw):
    m = get_system("unicycle")
    base = dict(
        delta_hr=m.delta_hr, q=m.q, n_best=m.n_best, gamma=m.gamma,
        t_max=m.t_max, s_max=20.0, seed=0,
    )
    base.update(kw)
    return PlannerConfig(**base)


def test_scenario_file_round_trip(tmp_path):
    scn = tiny_scenario()
    path = tmp_path / "tiny.json"
    save_scenario(str(path), scn)
    again = load_scenario(str(path))
    assert again.system == scn.system and again.name == scn.name
    for f in ("bounds_lo", "bounds_hi", "start", "goal", "goal_region"):
        assert np.allclose(getattr(again, f), getattr(scn, f))
    assert len(again.obstacles) == 1
    # Infinite goal tolerances survive the JSON trip (stored as null).
    text = path.read_text()
    assert "Infinity" not in text
    save_scenario(str(path), again)
    assert path.read_text() == text


def test_scenario_validation_errors():
    with pytest.raises(KinoplanError):
        scenario_from_dict({"format_version": 99})
    base = scenario_to_dict(tiny_scenario())
    missing = dict(base)
    del missing["start"]
    with pytest.raises(KinoplanError, match="start"):
        scenario_from_dict(missing)
    short = dict(base)
    short["goal"] = [1.0, 2.0]
    with pytest.raises(KinoplanError, match="goal"):
        scenario_from_dict(short)
    bad_obs = dict(base)
    bad_obs["obstacles"] = [{"kind": "box", "lo": [0, 0]}]
    with pytest.raises(KinoplanError, match="obstacles\\[0\\]"):
        scenario_from_dict(bad_obs)


def test_load_scenario_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(KinoplanError, match="valid JSON"):
        load_scenario(str(path))


def test_logical_clock_is_deterministic():
    clock = LogicalClock(tick=0.5)
    assert clock() == 0.5
    assert clock() == 1.0
    assert clock.reads == 2


def test_run_batch_seeds_and_determinism(tmp_path):
    scn = tiny_scenario()
    cfg = tiny_config()
    a = run_batch(scn, cfg, "gbrrt", trials=3, base_seed=10, logical_clock=True)
    b = run_batch(scn, cfg, "gbrrt", trials=3, base_seed=10, logical_clock=True)
    assert [r.seed for r in a] == [10, 11, 12]
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(str(pa), a, timestamp=False)
    write_csv(str(pb), b, timestamp=False)
    assert pa.read_bytes() == pb.read_bytes()
    header = pa.read_text().splitlines()[0]
    assert header.startswith("trial,seed,planner,")


def test_write_csv_timestamp_comment(tmp_path):
    records = run_batch(tiny_scenario(), tiny_config(), "rrt", trials=1, logical_clock=True)
    path = tmp_path / "t.csv"
    write_csv(str(path), records, timestamp=True)
    first = path.read_text().splitlines()[0]
    assert first.startswith("# generated ")


def test_aggregate_counts_failures_as_s_max():
    records = run_batch(tiny_scenario(), tiny_config(), "gbrrt", trials=2, logical_clock=True)
    failed = records[0].__class__(**{**records[0].__dict__, "success": False,
                                     "solution_time_s": math.inf, "cost": math.inf})
    stats = aggregate([records[1], failed], s_max=20.0)
    assert stats["trials"] == 2.0
    assert stats["success_rate"] == 0.5
    assert stats["time_mean"] == pytest.approx((records[1].solution_time_s + 20.0) / 2)
    with pytest.raises(KinoplanError):
        aggregate([], s_max=20.0)


def test_sweep_rows_and_csv(tmp_path):
    rows = sweep(
        tiny_scenario(), tiny_config(), "gbrrt", "q", [0.5, 0.9],
        trials=1, logical_clock=True,
    )
    assert [r["value"] for r in rows] == [0.5, 0.9]
    assert all(r["axis"] == "q" and r["scale"] == "linear" for r in rows)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(str(path), rows, timestamp=False)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("axis,scale,value,")
    assert len(lines) == 3
    with pytest.raises(KinoplanError):
        sweep(tiny_scenario(), tiny_config(), "gbrrt", "bogus", [1], trials=1)


def test_randomized_endpoints_are_free_and_seeded():
    from kinoplan.bench import _randomized_endpoints
    from kinoplan.collision import state_in_collision

    scn = tiny_scenario()
    model = get_system(scn.system)
    a = _randomized_endpoints(scn, seed=4)
    b = _randomized_endpoints(scn, seed=4)
    assert np.allclose(a.start, b.start) and np.allclose(a.goal, b.goal)
    assert not np.allclose(a.start, scn.start)
    assert not state_in_collision(a, a.start, model.position_dims)
    assert not state_in_collision(a, a.goal, model.position_dims)
