"""Unit tests for the planner engine: control flow, ablations, validation."""

import math

import numpy as np
import pytest

from kinoplan.bench import LogicalClock
from kinoplan.core import (
    AblationFlags,
    Edge,
    KinoplanError,
    PlannerConfig,
    Scenario,
)
from kinoplan.collision import Box
from kinoplan.dynamics import get_system
from kinoplan.planners import ALGORITHMS, PlannerRun, run_planner, validate_path


def empty_unicycle(goal=(30.0, 30.0)):
    return Scenario(
        system="unicycle",
        bounds_lo=np.array([0.0, 0.0, -np.pi]),
        bounds_hi=np.array([40.0, 40.0, np.pi]),
        start=np.array([5.0, 5.0, 0.0]),
        goal=np.array([goal[0], goal[1], 0.0]),
        goal_region=np.array([2.0, 2.0, np.inf]),
        obstacles=[],
        robot_radius=0.5,
        name="unit-empty",
    )


def unicycle_config(**kw):
    m = get_system("unicycle")
    base = dict(
        delta_hr=m.delta_hr, q=m.q, n_best=m.n_best, gamma=m.gamma,
        t_max=m.t_max, s_max=30.0, seed=7,
    )
    base.update(kw)
    return PlannerConfig(**base)


def test_unknown_algorithm_rejected():
    with pytest.raises(KinoplanError):
        PlannerRun(empty_unicycle(), unicycle_config(), "dijkstra")


def test_start_or_goal_in_collision_rejected():
    scn = empty_unicycle()
    blocked = Scenario(
        **{**scn.__dict__, "obstacles": [Box(lo=np.array([4.0, 4.0]), hi=np.array([6.0, 6.0]))]}
    )
    with pytest.raises(KinoplanError):
        PlannerRun(blocked, unicycle_config(), "gbrrt")


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_all_algorithms_solve_empty_world(algorithm):
    res = run_planner(empty_unicycle(), unicycle_config(), algorithm)
    assert res.success and res.path is not None
    assert validate_path(empty_unicycle(), res.path) == []
    assert res.n_forward > 1
    if algorithm == "rrt":
        assert res.n_reverse == 0
    else:
        assert res.n_reverse > 1


def test_same_seed_same_result():
    scn = empty_unicycle()
    a = run_planner(scn, unicycle_config(), "gbrrt", clock=LogicalClock())
    b = run_planner(scn, unicycle_config(), "gbrrt", clock=LogicalClock())
    assert a.iterations == b.iterations
    assert a.cost == pytest.approx(b.cost, abs=0.0)
    assert a.solution_time_s == b.solution_time_s
    assert np.allclose(a.path.end, b.path.end)


def test_tree_invariants_after_run():
    run = PlannerRun(empty_unicycle(), unicycle_config(seed=3), "gbrrt")
    run.run()
    run.fwd.audit()
    run.rev.audit()
    run.queue.audit()


def test_gabrrt_reverse_edges_are_geometric():
    run = PlannerRun(empty_unicycle(), unicycle_config(seed=5), "gabrrt")
    run.run()
    cap = run.config.nd_extend_cap
    for edge in run.rev.edges[1:]:
        assert edge.control is None and edge.maneuver_id is None
        assert len(edge.states) == 2
        assert edge.cost <= cap + 1e-9


def test_no_exploit_ablation_never_uses_queue():
    cfg = unicycle_config(ablations=AblationFlags(no_exploit=True), m_iter=300, s_max=5.0)
    run = PlannerRun(empty_unicycle(), cfg, "gbrrt")
    run.run()
    assert run.counters.exploit == 0
    assert len(run.queue) == 0


def test_no_fast_explore_ablation_routes_to_random():
    cfg = unicycle_config(
        ablations=AblationFlags(no_fast_explore=True, no_exploit=True),
        m_iter=200,
        s_max=5.0,
    )
    run = PlannerRun(empty_unicycle(goal=(39.0, 39.0)), cfg, "gbrrt")
    run.run()
    assert run.counters.fast_explore == 0
    assert run.counters.random_explore > 0


def test_exploit_pop_fail_falls_back_to_explore():
    """A queue entry whose reverse partner vanished from the ball triggers
    the pop-fail path and the iteration still explores."""
    run = PlannerRun(empty_unicycle(), unicycle_config(seed=1), "gbrrt")
    run._reverse_expand = lambda: None  # freeze the reverse tree (goal only)
    run.queue.push(0, 1.0)  # fake entry: root is far from any reverse node
    before = run.counters.exploit_pop_fail
    run.rng = np.random.default_rng(0)
    while run.counters.exploit_pop_fail == before:
        run.step()
        assert run.counters.iterations < 50
    assert run.counters.exploit == 0
    assert run.counters.forward_added > 0


def test_exploit_null_edge_takes_one_random_attempt():
    run = PlannerRun(empty_unicycle(), unicycle_config(seed=2), "gbrrt")
    run._exploit_edge = lambda for_id, rev_id: None  # all exploits collide
    run.run()
    assert run.counters.exploit == 0
    assert run.counters.exploit_null_edge > 0
    # Each null edge spent its iteration on at most one random explore.
    assert run.counters.random_explore >= 1


def test_rrt_goal_bias_frequency():
    scn = empty_unicycle()
    cfg = unicycle_config(seed=11, m_iter=2000, s_max=60.0, goal_bias=0.5)
    run = PlannerRun(scn, cfg, "rrt")
    samples = []
    orig = run._sample_state

    def spy():
        s = orig()
        samples.append(s)
        return s

    run._sample_state = spy
    for _ in range(400):
        run.step()
    # With bias 0.5, roughly half the iterations skip uniform sampling.
    frac = len(samples) / run.counters.iterations
    assert 0.35 < frac < 0.65


def test_validate_path_catches_corruption():
    scn = empty_unicycle()
    res = run_planner(scn, unicycle_config(), "gbrrt")
    path = res.path
    assert validate_path(scn, path) == []
    # Corrupt the chaining.
    shifted = path.edges[len(path.edges) // 2]
    shifted.states[:, 0] += 0.5
    problems = validate_path(scn, path)
    assert problems
    assert any("initial state" in p or "start" in p for p in problems)


def test_validate_path_catches_cost_mismatch():
    scn = empty_unicycle()
    res = run_planner(scn, unicycle_config(seed=9), "gabrrt")
    path = res.path
    path.cost += 1.0
    assert any("cost" in p for p in validate_path(scn, path))


def test_result_ratio_fields():
    scn = empty_unicycle()
    res = run_planner(scn, unicycle_config(), "gbrrt")
    assert res.r_x == pytest.approx(7.0 / 40.0)
    assert 0.0 <= res.r_rk <= 1.0
    assert res.r_edge > 1.0
    assert res.r_max == pytest.approx(
        7.0 / math.hypot(40.0, 40.0)
    )
