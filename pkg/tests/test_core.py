"""Unit tests for shared domain types in kinoplan.core."""

import math

import numpy as np
import pytest

from kinoplan.core import (
    ANGULAR,
    AblationFlags,
    Edge,
    FORWARD,
    InvalidStateError,
    KinoplanError,
    LINEAR,
    NotFoundError,
    PlannerConfig,
    REVERSE,
    Scenario,
    SearchTree,
    path_reconstruct,
    wrap_angle,
    wrap_state,
)


class ListIndex:
    """Minimal spatial-index stand-in for tree bookkeeping tests."""

    def __init__(self):
        self.items = []

    def __len__(self):
        return len(self.items)

    def insert(self, point_id, state):
        self.items.append((point_id, np.asarray(state, dtype=float)))


def line_edge(a, b, cost=None):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return Edge(
        times=np.array([0.0, 1.0]),
        states=np.vstack([a, b]),
        control=np.zeros(1),
        duration=1.0,
        cost=float(np.linalg.norm(b - a)) if cost is None else cost,
    )


def test_wrap_angle_range_and_known_values():
    assert wrap_angle(0.0) == 0.0
    assert wrap_angle(math.pi) == pytest.approx(-math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(-math.pi)
    assert wrap_angle(3.0 * math.pi) == pytest.approx(-math.pi)
    assert wrap_angle(math.pi / 2 + 8.0 * math.pi) == pytest.approx(math.pi / 2)
    for theta in np.linspace(-50.0, 50.0, 1001):
        w = wrap_angle(theta)
        assert -math.pi <= w < math.pi
        # Wrapping never changes the angle modulo 2*pi.
        assert math.isclose(
            math.cos(w), math.cos(theta), abs_tol=1e-12
        ) and math.isclose(math.sin(w), math.sin(theta), abs_tol=1e-12)


def test_wrap_state_only_touches_angular_dims():
    kinds = (LINEAR, ANGULAR, LINEAR)
    out = wrap_state(np.array([7.0, 5.0 * math.pi, -2.0]), kinds)
    assert out[0] == 7.0 and out[2] == -2.0
    assert out[1] == pytest.approx(-math.pi)


def test_wrap_state_rejects_bad_input():
    with pytest.raises(InvalidStateError):
        wrap_state(np.array([np.nan, 0.0]), (LINEAR, LINEAR))
    with pytest.raises(InvalidStateError):
        wrap_state(np.array([np.inf, 0.0]), (LINEAR, LINEAR))
    with pytest.raises(InvalidStateError):
        wrap_state(np.array([0.0, 0.0, 0.0]), (LINEAR, LINEAR))


def test_edge_endpoints_and_reversed_samples():
    e = line_edge([0.0, 0.0], [3.0, 4.0])
    assert np.allclose(e.initial, [0.0, 0.0])
    assert np.allclose(e.final, [3.0, 4.0])
    assert e.cost == pytest.approx(5.0)
    r = e.reversed_samples()
    assert np.allclose(r.initial, e.final)
    assert np.allclose(r.final, e.initial)
    assert np.allclose(r.times, [0.0, 1.0])
    # The original edge is untouched.
    assert np.allclose(e.initial, [0.0, 0.0])


def test_search_tree_costs_accumulate():
    tree = SearchTree(np.zeros(2), ListIndex())
    a = tree.add(np.array([1.0, 0.0]), 0, line_edge([0, 0], [1, 0]))
    b = tree.add(np.array([1.0, 2.0]), a, line_edge([1, 0], [1, 2]))
    assert len(tree) == 3
    assert tree.cost(0) == 0.0
    assert tree.cost(a) == pytest.approx(1.0)
    assert tree.cost(b) == pytest.approx(3.0)
    assert len(tree.index) == 3
    tree.audit()


def test_search_tree_rejects_unknown_ids():
    tree = SearchTree(np.zeros(2), ListIndex())
    with pytest.raises(NotFoundError):
        tree.add(np.ones(2), 5, line_edge([0, 0], [1, 1]))
    with pytest.raises(NotFoundError):
        tree.state(3)
    with pytest.raises(NotFoundError):
        tree.cost(-1)


def test_reverse_tree_audit_checks_edge_initial():
    tree = SearchTree(np.zeros(2), ListIndex(), kind=REVERSE)
    # Reverse edges end at the parent (anchor), start at the new node.
    edge = line_edge([2.0, 0.0], [0.0, 0.0])
    tree.add(np.array([2.0, 0.0]), 0, edge)
    tree.audit()
    bad = line_edge([9.0, 9.0], [0.0, 0.0])
    tree.add(np.array([2.0, 2.0]), 0, bad)
    with pytest.raises(AssertionError):
        tree.audit()


def test_path_reconstruct_orders_edges_root_first():
    tree = SearchTree(np.zeros(2), ListIndex())
    e1 = line_edge([0, 0], [1, 0])
    e2 = line_edge([1, 0], [1, 1])
    a = tree.add(e1.final, 0, e1)
    b = tree.add(e2.final, a, e2)
    path = path_reconstruct(tree, b)
    assert len(path.edges) == 2
    assert np.allclose(path.start, [0, 0])
    assert np.allclose(path.end, [1, 1])
    assert path.cost == pytest.approx(2.0)


def test_path_reconstruct_requires_forward_tree():
    tree = SearchTree(np.zeros(2), ListIndex(), kind=REVERSE)
    with pytest.raises(KinoplanError):
        path_reconstruct(tree, 0)


def test_ablation_flags_round_trip():
    flags = AblationFlags.from_names(["no_exploit", "range_update"])
    assert flags.no_exploit and flags.range_update
    assert not flags.no_fast_explore and not flags.no_queue_update
    assert sorted(flags.names()) == ["no_exploit", "range_update"]
    with pytest.raises(KinoplanError):
        AblationFlags.from_names(["bogus"])


def test_planner_config_validation_and_defaults():
    cfg = PlannerConfig(delta_hr=7.0)
    assert cfg.nd_extend_cap == pytest.approx(3.5)
    assert cfg.exploit_ratio(10) == pytest.approx(0.8)
    sched = PlannerConfig(p_schedule=lambda k: 0.1 * k)
    assert sched.exploit_ratio(3) == pytest.approx(0.3)
    with pytest.raises(KinoplanError):
        PlannerConfig(delta_hr=0.0)
    with pytest.raises(KinoplanError):
        PlannerConfig(q=1.5)
    with pytest.raises(KinoplanError):
        PlannerConfig(n_best=0)


def test_scenario_goal_region_wraps_angles():
    scn = Scenario(
        system="unicycle",
        bounds_lo=np.array([0.0, 0.0, -math.pi]),
        bounds_hi=np.array([10.0, 10.0, math.pi]),
        start=np.zeros(3),
        goal=np.array([5.0, 5.0, math.pi - 0.01]),
        goal_region=np.array([1.0, 1.0, 0.1]),
    )
    kinds = (LINEAR, LINEAR, ANGULAR)
    # Heading just past -pi is an angular hair away from the goal heading.
    assert scn.in_goal_region(np.array([5.0, 5.0, -math.pi + 0.01]), kinds)
    assert not scn.in_goal_region(np.array([5.0, 5.0, 0.0]), kinds)
    assert scn.in_bounds(np.array([0.0, 10.0, 0.0]))
    assert not scn.in_bounds(np.array([-0.1, 5.0, 0.0]))
