"""Unit tests for obstacles and edge collision checking."""

import math

import numpy as np
import pytest

from kinoplan.collision import (
    Box,
    Cylinder,
    Sphere,
    edge_in_collision,
    obstacle_from_dict,
    obstacle_to_dict,
    state_in_collision,
)
from kinoplan.core import Edge, KinoplanError, Scenario


def make_scenario(obstacles, robot_radius=0.5):
    return Scenario(
        system="quadrotor",
        bounds_lo=np.zeros(3),
        bounds_hi=np.full(3, 10.0),
        start=np.zeros(3),
        goal=np.full(3, 9.0),
        goal_region=np.ones(3),
        obstacles=obstacles,
        robot_radius=robot_radius,
    )


def segment_edge(a, b, n=3):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    frac = np.linspace(0.0, 1.0, n)[:, None]
    states = a + (b - a) * frac
    return Edge(
        times=np.linspace(0.0, 1.0, n),
        states=states,
        control=np.zeros(1),
        duration=1.0,
        cost=float(np.linalg.norm(b - a)),
    )


def test_box_distance():
    box = Box(lo=np.array([0.0, 0.0]), hi=np.array([2.0, 2.0]))
    assert box.distance(np.array([1.0, 1.0])) == 0.0
    assert box.distance(np.array([5.0, 1.0])) == pytest.approx(3.0)
    assert box.distance(np.array([5.0, 6.0])) == pytest.approx(5.0)
    with pytest.raises(KinoplanError):
        Box(lo=np.array([1.0]), hi=np.array([0.0]))


def test_sphere_distance():
    s = Sphere(center=np.array([0.0, 0.0, 0.0]), radius=2.0)
    assert s.distance(np.array([1.0, 0.0, 0.0])) == 0.0
    assert s.distance(np.array([5.0, 0.0, 0.0])) == pytest.approx(3.0)
    with pytest.raises(KinoplanError):
        Sphere(center=np.zeros(2), radius=0.0)


def test_cylinder_distance():
    c = Cylinder(center_xy=np.array([0.0, 0.0]), radius=1.0, z_lo=0.0, z_hi=2.0)
    assert c.distance(np.array([0.5, 0.0, 1.0])) == 0.0
    assert c.distance(np.array([3.0, 0.0, 1.0])) == pytest.approx(2.0)
    assert c.distance(np.array([0.0, 0.0, 4.0])) == pytest.approx(2.0)
    assert c.distance(np.array([4.0, 0.0, 6.0])) == pytest.approx(5.0)
    # 2-D query ignores z caps.
    assert c.distance(np.array([3.0, 0.0])) == pytest.approx(2.0)


def test_obstacle_dict_round_trip():
    obstacles = [
        Box(lo=np.zeros(2), hi=np.ones(2)),
        Sphere(center=np.array([1.0, 2.0, 3.0]), radius=0.7),
        Cylinder(center_xy=np.array([5.0, 5.0]), radius=1.2, z_lo=0.0, z_hi=3.0),
        Cylinder(center_xy=np.array([2.0, 2.0]), radius=0.5),
    ]
    for obs in obstacles:
        again = obstacle_from_dict(obstacle_to_dict(obs))
        assert type(again) is type(obs)
        assert obstacle_to_dict(again) == obstacle_to_dict(obs)
    with pytest.raises(KinoplanError):
        obstacle_from_dict({"kind": "torus"})


def test_state_in_collision_radius_and_bounds():
    scn = make_scenario([Sphere(center=np.array([5.0, 5.0, 5.0]), radius=1.0)])
    dims = (0, 1, 2)
    assert state_in_collision(scn, np.array([5.0, 5.0, 5.0]), dims)
    assert state_in_collision(scn, np.array([5.0, 5.0, 6.4]), dims)  # within radius
    assert not state_in_collision(scn, np.array([5.0, 5.0, 6.6]), dims)
    assert state_in_collision(scn, np.array([-1.0, 5.0, 5.0]), dims)  # out of bounds


def test_edge_collision_dense_and_sparse_sampling():
    scn = make_scenario([Sphere(center=np.array([5.0, 5.0, 5.0]), radius=1.0)])
    dims = (0, 1, 2)
    # A two-sample edge passing straight through the obstacle: only the
    # fill-in logic can catch the interior hit.
    through = segment_edge([1.0, 5.0, 5.0], [9.0, 5.0, 5.0], n=2)
    assert edge_in_collision(scn, through, dims)
    clear = segment_edge([1.0, 1.0, 1.0], [9.0, 1.0, 1.0], n=2)
    assert not edge_in_collision(scn, clear, dims)
    # Densely sampled edges agree after thinning.
    dense_hit = segment_edge([1.0, 5.0, 5.0], [9.0, 5.0, 5.0], n=4001)
    assert edge_in_collision(scn, dense_hit, dims)
    dense_clear = segment_edge([1.0, 1.0, 1.0], [9.0, 1.0, 1.0], n=4001)
    assert not edge_in_collision(scn, dense_clear, dims)


def test_edge_collision_out_of_bounds():
    scn = make_scenario([])
    edge = segment_edge([1.0, 1.0, 1.0], [1.0, 1.0, 11.0], n=5)
    assert edge_in_collision(scn, edge, (0, 1, 2))


def test_edge_collision_margin_soundness():
    """A passing check stays passing at any finer recheck resolution."""
    rng = np.random.default_rng(8)
    scn = make_scenario(
        [
            Sphere(center=np.array([5.0, 5.0, 5.0]), radius=1.5),
            Box(lo=np.array([2.0, 7.0, 0.0]), hi=np.array([3.0, 9.0, 10.0])),
        ]
    )
    dims = (0, 1, 2)
    checked = 0
    for _ in range(300):
        a = rng.uniform(0.0, 10.0, size=3)
        b = rng.uniform(0.0, 10.0, size=3)
        edge = segment_edge(a, b, n=2)
        if not edge_in_collision(scn, edge, dims):
            checked += 1
            assert not edge_in_collision(scn, edge, dims, resolution=0.01)
    assert checked > 20  # the scenario leaves plenty of free edges
