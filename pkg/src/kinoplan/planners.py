"""Bidirectional kinodynamic planners and the best-input RRT baseline.

Two bidirectional variants share one engine. Both grow a forward tree with
real dynamics and use a reverse tree rooted at the goal as an admissible-ish
cost-to-goal heuristic, coupling the trees through a priority queue of
forward nodes keyed by (distance to nearest reverse node + that node's
cost-to-goal):

* "gbrrt"  grows the reverse tree with backward dynamics, so the heuristic
  respects the vehicle model.
* "gabrrt" grows a geometric reverse tree by straight-line extension and
  measures all cross-tree quantities with a velocity-blind distance.

Neither variant solves two-point boundary value problems; all edges come
from forward simulation of sampled or library controls.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .collision import edge_in_collision, state_in_collision
from .core import (
    ANGULAR,
    Edge,
    FORWARD,
    KinoplanError,
    Path,
    PlannerConfig,
    REVERSE,
    Scenario,
    SearchTree,
    path_reconstruct,
    wrap_angle,
)
from .dynamics import SystemModel, get_system, rk4_propagate, sample_control, sample_duration
from .maneuvers import get_library
from .metrics import DistanceSpec, distance, distance_many
from .pqueue import FrontierQueue
from .spatial import RadiusSchedule, SpatialIndex

ALGORITHMS = ("gbrrt", "gabrrt", "rrt")


@dataclass
class Counters:
    iterations: int = 0
    coin_explore: int = 0  # iterations where the explore/exploit coin chose explore
    exploit: int = 0
    exploit_pop_fail: int = 0
    exploit_null_edge: int = 0
    fast_explore: int = 0
    random_explore: int = 0
    forward_added: int = 0
    reverse_added: int = 0
    rk_hits: int = 0  # iterations with min cross-tree NN distance <= r_k


@dataclass
class Result:
    algorithm: str
    success: bool
    cost: float
    solution_time_s: float
    iterations: int
    found_iteration: int
    n_forward: int
    n_reverse: int
    r_rk: float
    r_edge: float
    r_x: float
    r_max: float
    path: Optional[Path]
    counters: Counters


class PlannerRun:
    """One planner execution; `step()` advances a single iteration.

    The expansion primitives (_reverse_expand, _exploit_edge,
    _fast_explore_edge, _random_explore_edge) are instance methods so tests
    can substitute cheap stubs and exercise the control flow alone.
    """

    def __init__(
        self,
        scenario: Scenario,
        config: PlannerConfig,
        algorithm: str,
        clock: Optional[Callable[[], float]] = None,
    ):
        if algorithm not in ALGORITHMS:
            raise KinoplanError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
        self.scenario = scenario
        self.config = config
        self.algorithm = algorithm
        self.clock = clock if clock is not None else time.perf_counter
        self.rng = np.random.default_rng(config.seed)
        self.model: SystemModel = get_system(scenario.system)
        self.spec = self.model.distance_spec()
        self.nd_spec = self.model.nd_distance_spec() if algorithm == "gabrrt" else None
        self.cross_spec = self.nd_spec if algorithm == "gabrrt" else self.spec
        self.library = get_library(scenario.system) if self.model.uses_maneuvers else None

        start = self.model.wrap(np.asarray(scenario.start, dtype=float))
        goal = self.model.wrap(np.asarray(scenario.goal, dtype=float))
        if state_in_collision(scenario, start, self.model.position_dims):
            raise KinoplanError("start state is in collision or out of bounds")
        if state_in_collision(scenario, goal, self.model.position_dims):
            raise KinoplanError("goal state is in collision or out of bounds")

        fwd_nd_index = SpatialIndex(self.nd_spec) if algorithm == "gabrrt" else None
        self.fwd = SearchTree(start, SpatialIndex(self.spec), FORWARD, nd_index=fwd_nd_index)
        self.rev: Optional[SearchTree] = None
        if algorithm != "rrt":
            self.rev = SearchTree(goal, SpatialIndex(self.cross_spec), REVERSE)
        self.goal = goal
        self.queue = FrontierQueue()
        self.radius = RadiusSchedule(
            gamma=config.gamma,
            dim=self.model.state_dim,
            exponent=config.radius_exponent,
            cap=config.delta_hr,
        )
        self.counters = Counters()
        self._min_cross = math.inf
        self.goal_node: Optional[int] = None
        self.found_iteration = 0
        if self.rev is not None:
            self._insert_pq(0, start)

    # --- basic helpers ---------------------------------------------------

    def r_k(self) -> float:
        if self.config.constant_radius or self.rev is None:
            return self.config.delta_hr
        return self.radius(len(self.rev))

    def _sample_state(self) -> np.ndarray:
        return self.rng.uniform(self.scenario.bounds_lo, self.scenario.bounds_hi)

    def _free_endpoint(self, edge: Edge) -> np.ndarray:
        return edge.final if edge.direction == FORWARD else edge.initial

    def _propagate_best_input(
        self,
        anchor: np.ndarray,
        target: np.ndarray,
        direction: str,
        rank_spec: DistanceSpec,
    ) -> Optional[Edge]:
        """Sample candidate motions from `anchor`, keep the one whose free
        endpoint lands closest to `target`, then collision-check it."""
        if self.library is not None:
            n = min(self.config.n_best, len(self.library))
            subset = self.rng.choice(len(self.library), size=n, replace=False)
            idx = self.library.best_template(anchor, target, rank_spec, direction, subset)
            edge = self.library.make_edge(idx, anchor, direction)
        else:
            bounds = (self.scenario.bounds_lo, self.scenario.bounds_hi)
            best_edge, best_d = None, math.inf
            for _ in range(self.config.n_best):
                u = sample_control(self.model, self.rng)
                t = sample_duration(self.rng, self.model.t_max, self.config.step)
                cand = rk4_propagate(
                    self.model, anchor, u, t, self.config.step, direction, bounds, self.spec
                )
                if cand is None:
                    continue
                d = distance(rank_spec, self._free_endpoint(cand), target)
                if d < best_d:
                    best_edge, best_d = cand, d
            edge = best_edge
        if edge is None:
            return None
        if edge_in_collision(self.scenario, edge, self.model.position_dims):
            return None
        return edge

    def _propagate_random(self, anchor: np.ndarray, direction: str) -> Optional[Edge]:
        if self.library is not None:
            idx = self.library.random_template(self.rng)
            edge = self.library.make_edge(idx, anchor, direction)
        else:
            bounds = (self.scenario.bounds_lo, self.scenario.bounds_hi)
            u = sample_control(self.model, self.rng)
            t = sample_duration(self.rng, self.model.t_max, self.config.step)
            edge = rk4_propagate(
                self.model, anchor, u, t, self.config.step, direction, bounds, self.spec
            )
        if edge is None:
            return None
        if edge_in_collision(self.scenario, edge, self.model.position_dims):
            return None
        return edge

    # --- priority queue coupling -----------------------------------------

    def _enqueue(self, for_id: int, key: float) -> None:
        if for_id in self.queue:
            self.queue.decrease_key(for_id, key)
        else:
            self.queue.push(for_id, key)

    def _insert_pq(self, for_id: int, state: np.ndarray) -> None:
        """Key a freshly added forward node against its nearest reverse node."""
        if self.rev is None or self.config.ablations.no_exploit:
            return
        nn = self.rev.index.nearest(state)
        if nn is None:
            return
        rev_id, rev_state = nn
        d = distance(self.cross_spec, state, rev_state)
        self._min_cross = min(self._min_cross, d)
        if d <= self.r_k():
            self._enqueue(for_id, d + self.rev.cost(rev_id))

    def _update_pq(self, rev_id: int, rev_state: np.ndarray) -> None:
        """Re-key forward nodes after a reverse node arrives near them."""
        if self.config.ablations.no_exploit or self.config.ablations.no_queue_update:
            return
        cross_index = self.fwd.nd_index if self.algorithm == "gabrrt" else self.fwd.index
        h = self.rev.cost(rev_id)
        r = self.r_k()
        if self.config.ablations.range_update:
            cands = cross_index.range(rev_state, r)
        else:
            nn = cross_index.nearest(rev_state)
            cands = [nn] if nn is not None else []
        for for_id, for_state in cands:
            d = distance(self.cross_spec, for_state, rev_state)
            self._min_cross = min(self._min_cross, d)
            if d <= r:
                self._enqueue(for_id, d + h)

    # --- expansion primitives (stub points for tests) ---------------------

    def _reverse_expand(self) -> Optional[int]:
        """Grow the reverse tree toward a random sample; returns new node id."""
        x_rand = self._sample_state()
        nn = self.rev.index.nearest(x_rand)
        nn_id, nn_state = nn
        if self.algorithm == "gbrrt":
            edge = self._propagate_best_input(nn_state, x_rand, REVERSE, self.spec)
            if edge is None:
                return None
            new_state = edge.initial
        else:
            d = distance(self.nd_spec, nn_state, x_rand)
            if d < 1e-12:
                return None
            new_state = self._nd_interpolate(nn_state, x_rand, min(1.0, self.config.nd_extend_cap / d))
            seg_cost = distance(self.nd_spec, nn_state, new_state)
            edge = Edge(
                times=np.array([0.0, 1.0]),
                states=np.array([new_state, nn_state]),
                control=None,
                duration=1.0,
                cost=seg_cost,
                direction=REVERSE,
            )
            if edge_in_collision(self.scenario, edge, self.model.position_dims):
                return None
        rev_id = self.rev.add(new_state, nn_id, edge)
        self.counters.reverse_added += 1
        self._update_pq(rev_id, new_state)
        return rev_id

    def _nd_interpolate(self, a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
        out = a + t * (b - a)
        for i, kind in enumerate(self.model.kinds):
            if kind == ANGULAR:
                out[i] = wrap_angle(a[i] + t * wrap_angle(b[i] - a[i]))
        return out

    def _exploit_edge(self, for_id: int, rev_id: int) -> Optional[Edge]:
        anchor = self.fwd.state(for_id)
        target = self.rev.state(rev_id)
        return self._propagate_best_input(anchor, target, FORWARD, self.cross_spec)

    def _fast_explore_edge(self) -> Optional[Tuple[int, Edge]]:
        x_rand = self._sample_state()
        nn_id, nn_state = self.fwd.index.nearest(x_rand)
        edge = self._propagate_best_input(nn_state, x_rand, FORWARD, self.spec)
        return None if edge is None else (nn_id, edge)

    def _random_explore_edge(self) -> Optional[Tuple[int, Edge]]:
        x_rand = self._sample_state()
        nn_id, nn_state = self.fwd.index.nearest(x_rand)
        edge = self._propagate_random(nn_state, FORWARD)
        return None if edge is None else (nn_id, edge)

    # --- iteration logic ---------------------------------------------------

    def _add_forward(self, parent: int, edge: Edge) -> int:
        for_id = self.fwd.add(edge.final, parent, edge)
        self.counters.forward_added += 1
        if self.rev is not None:
            self._insert_pq(for_id, edge.final)
        if self.goal_node is None and self.scenario.in_goal_region(edge.final, self.model.kinds):
            self.goal_node = for_id
            self.found_iteration = self.counters.iterations
        return for_id

    def _forward_expand(self) -> None:
        cfg = self.config
        exploit_coin = self.rng.random() <= cfg.exploit_ratio(self.counters.iterations)
        if not exploit_coin:
            self.counters.coin_explore += 1
        want_exploit = (
            exploit_coin
            and not cfg.ablations.no_exploit
            and self.rev is not None
            and len(self.queue) > 0
        )
        if want_exploit:
            for_id, _ = self.queue.pop_min()
            cands = self.rev.index.range(self.fwd.state(for_id), self.r_k())
            if not cands:
                self.counters.exploit_pop_fail += 1
            else:
                anchor = self.fwd.state(for_id)
                # ids ascend in cands, so argmin keeps the lowest id on ties
                keys = distance_many(
                    self.cross_spec, np.array([s for _, s in cands]), anchor
                ) + np.array([self.rev.cost(i) for i, _ in cands])
                best_id = cands[int(np.argmin(keys))][0]
                edge = self._exploit_edge(for_id, best_id)
                if edge is None:
                    self.counters.exploit_null_edge += 1
                    out = self._random_explore_edge()
                    if out is not None:
                        self.counters.random_explore += 1
                        self._add_forward(*out)
                    return
                self.counters.exploit += 1
                self._add_forward(for_id, edge)
                return
        # explore (coin said so, queue was empty, or the pop had no partner)
        if cfg.ablations.no_fast_explore:
            out = self._random_explore_edge()
            if out is not None:
                self.counters.random_explore += 1
                self._add_forward(*out)
            return
        out = self._fast_explore_edge()
        if out is not None:
            self.counters.fast_explore += 1
            self._add_forward(*out)
            return
        out = self._random_explore_edge()
        if out is not None:
            self.counters.random_explore += 1
            self._add_forward(*out)

    def _rrt_step(self) -> None:
        if self.rng.random() < self.config.goal_bias:
            x_rand = self.goal
        else:
            x_rand = self._sample_state()
        nn_id, nn_state = self.fwd.index.nearest(x_rand)
        edge = self._propagate_best_input(nn_state, x_rand, FORWARD, self.spec)
        if edge is not None:
            self._add_forward(nn_id, edge)

    def step(self) -> None:
        self.counters.iterations += 1
        if self.algorithm == "rrt":
            self._rrt_step()
            return
        self._reverse_expand()
        self._forward_expand()
        if self._min_cross <= self.r_k():
            self.counters.rk_hits += 1

    # --- run loop ----------------------------------------------------------

    def run(self) -> Result:
        t0 = self.clock()
        elapsed = 0.0
        while (
            self.goal_node is None
            and self.counters.iterations < self.config.m_iter
            and elapsed <= self.config.s_max
        ):
            self.step()
            elapsed = self.clock() - t0
        return self._result(elapsed)

    def _result(self, elapsed: float) -> Result:
        success = self.goal_node is not None
        path = path_reconstruct(self.fwd, self.goal_node) if success else None
        if path is not None:
            path.found_iteration = self.found_iteration
            path.elapsed_s = elapsed
        edge_costs = [e.cost for e in self.fwd.edges if e is not None]
        if self.rev is not None:
            edge_costs += [e.cost for e in self.rev.edges if e is not None]
        mean_edge = float(np.mean(edge_costs)) if edge_costs else math.nan
        d = self.config.delta_hr
        r_max_den = distance(self.spec, self.scenario.bounds_lo, self.scenario.bounds_hi)
        extent = float(self.scenario.bounds_hi[0] - self.scenario.bounds_lo[0])
        return Result(
            algorithm=self.algorithm,
            success=success,
            cost=path.cost if path is not None else math.inf,
            solution_time_s=elapsed if success else math.inf,
            iterations=self.counters.iterations,
            found_iteration=self.found_iteration if success else 0,
            n_forward=len(self.fwd),
            n_reverse=len(self.rev) if self.rev is not None else 0,
            r_rk=(
                self.counters.rk_hits / self.counters.iterations
                if self.counters.iterations and self.rev is not None
                else 0.0
            ),
            r_edge=d / mean_edge if edge_costs and mean_edge > 0 else math.nan,
            r_x=d / extent if extent > 0 else math.nan,
            r_max=d / r_max_den if r_max_den > 0 else math.nan,
            path=path,
            counters=self.counters,
        )


def run_planner(
    scenario: Scenario,
    config: PlannerConfig,
    algorithm: str,
    clock: Optional[Callable[[], float]] = None,
) -> Result:
    return PlannerRun(scenario, config, algorithm, clock=clock).run()


def validate_path(
    scenario: Scenario,
    path: Path,
    step: float = 1e-3,
    reintegration_atol: float = 1e-6,
) -> List[str]:
    """Independent validity audit of a solution path; returns found problems."""
    model = get_system(scenario.system)
    spec = model.distance_spec()
    problems: List[str] = []
    if not path.edges:
        return ["path has no edges"]

    def state_gap(a, b) -> float:
        diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        for i, kind in enumerate(model.kinds):
            if kind == ANGULAR:
                diff[i] = wrap_angle(diff[i])
        return float(np.max(np.abs(diff)))

    if state_gap(path.start, model.wrap(scenario.start)) > 1e-9:
        problems.append("path does not start at the scenario start state")
    if not scenario.in_goal_region(path.end, model.kinds):
        problems.append("path does not end inside the goal region")
    for i in range(len(path.edges) - 1):
        if state_gap(path.edges[i].final, path.edges[i + 1].initial) > 1e-9:
            problems.append(f"edge {i} final state != edge {i + 1} initial state")
    bounds = (scenario.bounds_lo, scenario.bounds_hi)
    library = get_library(scenario.system) if model.uses_maneuvers else None
    for i, e in enumerate(path.edges):
        if e.maneuver_id is not None:
            replay = library.make_edge(e.maneuver_id, e.initial, FORWARD)
        else:
            replay = rk4_propagate(
                model, e.initial, e.control, e.duration, step, FORWARD, bounds, spec
            )
        if replay is None or state_gap(replay.final, e.final) > reintegration_atol:
            problems.append(f"edge {i} does not re-integrate to its stored endpoint")
        fine = scenario.robot_radius / 4.0 if scenario.robot_radius > 0 else 0.025
        if edge_in_collision(scenario, e, model.position_dims, resolution=fine):
            problems.append(f"edge {i} is in collision at double resolution")
    total = sum(e.cost for e in path.edges)
    if not math.isclose(total, path.cost, rel_tol=1e-9, abs_tol=1e-9):
        problems.append("path cost does not equal the sum of edge costs")
    return problems
