"""Shared domain types: states, edges, search trees, paths, configs, scenarios."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

TWO_PI = 2.0 * math.pi

LINEAR = "linear"
ANGULAR = "angular"


class KinoplanError(Exception):
    """Base class for all package errors."""


class InvalidStateError(KinoplanError):
    """State vector violates an invariant (wrong length, NaN/Inf, ...)."""


class PropagationError(KinoplanError):
    """Numerical integration produced a non-finite state."""


class NotFoundError(KinoplanError):
    """Requested node id does not exist."""


def wrap_angle(theta: float) -> float:
    """Map an angle into [-pi, pi)."""
    return (theta + math.pi) % TWO_PI - math.pi


def wrap_state(values: np.ndarray, kinds: Sequence[str]) -> np.ndarray:
    """Return a copy of `values` with angular components wrapped into [-pi, pi).

    Raises InvalidStateError on non-finite input.
    """
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidStateError(f"non-finite state: {values}")
    if len(values) != len(kinds):
        raise InvalidStateError(
            f"state length {len(values)} != dimension kinds length {len(kinds)}"
        )
    out = values.copy()
    for i, kind in enumerate(kinds):
        if kind == ANGULAR:
            out[i] = wrap_angle(out[i])
    return out


def angular_mask(kinds: Sequence[str]) -> np.ndarray:
    return np.array([k == ANGULAR for k in kinds], dtype=bool)


FORWARD = "forward"
REVERSE = "reverse"


@dataclass
class Edge:
    """A dynamically feasible trajectory between two states.

    `times` is strictly increasing from 0 to `duration`; `states[0]` is the
    initial state and `states[-1]` the final state. `control` is the constant
    control vector (None for maneuver edges, which carry `maneuver_id`).
    """

    times: np.ndarray
    states: np.ndarray
    control: Optional[np.ndarray]
    duration: float
    cost: float
    direction: str = FORWARD
    truncated: bool = False
    maneuver_id: Optional[int] = None

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def reversed_samples(self) -> "Edge":
        """Same geometry with sample order flipped (used by symmetry checks)."""
        t = self.duration - self.times[::-1]
        return replace(self, times=t, states=self.states[::-1].copy())


@dataclass
class Path:
    edges: list
    cost: float
    found_iteration: int = 0
    elapsed_s: float = 0.0

    @property
    def start(self) -> np.ndarray:
        return self.edges[0].initial

    @property
    def end(self) -> np.ndarray:
        return self.edges[-1].final


class SearchTree:
    """Rooted tree of states with parent edges and accumulated cost.

    `index` (and the optional `nd_index`) are dynamic spatial indexes kept in
    lock-step with the node collection.
    """

    def __init__(self, root: np.ndarray, index, kind: str = FORWARD, nd_index=None):
        self.kind = kind
        self.states: list[np.ndarray] = []
        self.parents: list[Optional[int]] = []
        self.edges: list[Optional[Edge]] = []
        self.costs: list[float] = []
        self.index = index
        self.nd_index = nd_index
        self._add(np.asarray(root, dtype=float), None, None, 0.0)

    def __len__(self) -> int:
        return len(self.states)

    def _add(self, state, parent, edge, cost) -> int:
        node_id = len(self.states)
        self.states.append(state)
        self.parents.append(parent)
        self.edges.append(edge)
        self.costs.append(cost)
        self.index.insert(node_id, state)
        if self.nd_index is not None:
            self.nd_index.insert(node_id, state)
        return node_id

    def add(self, state: np.ndarray, parent: int, edge: Edge) -> int:
        if parent < 0 or parent >= len(self.states):
            raise NotFoundError(f"unknown parent id {parent}")
        return self._add(
            np.asarray(state, dtype=float), parent, edge, self.costs[parent] + edge.cost
        )

    def state(self, node_id: int) -> np.ndarray:
        if node_id < 0 or node_id >= len(self.states):
            raise NotFoundError(f"unknown node id {node_id}")
        return self.states[node_id]

    def cost(self, node_id: int) -> float:
        if node_id < 0 or node_id >= len(self.costs):
            raise NotFoundError(f"unknown node id {node_id}")
        return self.costs[node_id]

    def audit(self) -> None:
        """Check structural invariants; raises AssertionError on violation."""
        assert self.parents[0] is None and self.costs[0] == 0.0
        assert len(self.index) == len(self.states)
        for i in range(1, len(self.states)):
            parent = self.parents[i]
            edge = self.edges[i]
            assert parent is not None and edge is not None
            if self.kind == FORWARD:
                anchor = edge.final
            else:
                anchor = edge.initial
            assert np.allclose(anchor, self.states[i], atol=1e-9)
            assert math.isclose(
                self.costs[i], self.costs[parent] + edge.cost, rel_tol=1e-9, abs_tol=1e-9
            )


def path_reconstruct(tree: SearchTree, leaf: int) -> Path:
    """Walk parent links from `leaf` to the root; edges returned root-first."""
    if tree.kind != FORWARD:
        raise KinoplanError("paths are reconstructed from the forward tree only")
    tree.state(leaf)  # raises NotFoundError on bad id
    edges = []
    node = leaf
    while tree.parents[node] is not None:
        edges.append(tree.edges[node])
        node = tree.parents[node]
    edges.reverse()
    return Path(edges=edges, cost=tree.costs[leaf])


@dataclass
class AblationFlags:
    no_fast_explore: bool = False
    no_queue_update: bool = False
    no_exploit: bool = False
    range_update: bool = False

    @classmethod
    def from_names(cls, names: Sequence[str]) -> "AblationFlags":
        flags = cls()
        for name in names:
            name = name.strip()
            if not name:
                continue
            if not hasattr(flags, name):
                raise KinoplanError(f"unknown ablation flag: {name!r}")
            setattr(flags, name, True)
        return flags

    def names(self) -> list[str]:
        return [k for k, v in self.__dict__.items() if v]


@dataclass
class PlannerConfig:
    delta_hr: float = 7.0
    q: float = 0.8
    p_schedule: Optional[Callable[[int], float]] = None
    n_best: int = 40
    gamma: float = 14.0
    radius_exponent: str = "one-over-d-plus-one"
    t_max: float = 2.0
    m_iter: int = 1_000_000
    s_max: float = 60.0
    seed: int = 0
    step: float = 1e-3
    epsilon_nd: Optional[float] = None  # GABRRT Extend cap; defaults to delta_hr / 2
    goal_bias: float = 0.05  # baseline RRT only
    constant_radius: bool = False  # sweep mode: r_k = delta_hr throughout
    ablations: AblationFlags = field(default_factory=AblationFlags)

    def __post_init__(self):
        if not (0.0 < self.delta_hr < math.inf):
            raise KinoplanError(f"delta_hr must be in (0, inf), got {self.delta_hr}")
        if self.p_schedule is None and not (0.0 <= self.q <= 1.0):
            raise KinoplanError(f"q must be in [0, 1], got {self.q}")
        if self.n_best < 1:
            raise KinoplanError(f"n_best must be >= 1, got {self.n_best}")

    def exploit_ratio(self, k: int) -> float:
        if self.p_schedule is not None:
            return self.p_schedule(k)
        return self.q

    @property
    def nd_extend_cap(self) -> float:
        return self.epsilon_nd if self.epsilon_nd is not None else self.delta_hr / 2.0


@dataclass
class Scenario:
    system: str
    bounds_lo: np.ndarray
    bounds_hi: np.ndarray
    start: np.ndarray
    goal: np.ndarray
    goal_region: np.ndarray  # per-dimension tolerance; inf = unconstrained
    obstacles: list = field(default_factory=list)
    robot_radius: float = 0.0
    name: str = "scenario"

    def in_bounds(self, state: np.ndarray) -> bool:
        return bool(
            np.all(state >= self.bounds_lo - 1e-12)
            and np.all(state <= self.bounds_hi + 1e-12)
        )

    def in_goal_region(self, state: np.ndarray, kinds: Sequence[str]) -> bool:
        diff = np.abs(state - self.goal)
        for i, kind in enumerate(kinds):
            if kind == ANGULAR:
                diff[i] = abs(wrap_angle(state[i] - self.goal[i]))
        return bool(np.all(diff <= self.goal_region + 1e-12))
