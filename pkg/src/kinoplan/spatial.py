"""Dynamic spatial index with wrap-aware pruning, plus the shrinking
neighborhood radius schedule.

The index is a bucketed kd-tree over the feature embedding of a DistanceSpec:
leaves hold up to BUCKET points evaluated in one vectorized pass, interior
nodes carry subtree bounding boxes for pruning. Angular features are handled
throughout: point distances use shortest-angle differences and box pruning
treats an interval inside [-pi, pi) as an arc whose wrapped distance to a
query is attained at an endpoint or is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import ANGULAR, KinoplanError, TWO_PI
from .metrics import DistanceSpec

BUCKET = 32


class DuplicateIdError(KinoplanError):
    pass


def _axis_gap(q: float, lo: float, hi: float, angular: bool) -> float:
    """Unweighted lower bound on the axis distance from q to interval [lo, hi]."""
    if angular:
        if lo <= q <= hi:
            return 0.0
        da = abs(q - lo) % TWO_PI
        da = min(da, TWO_PI - da)
        db = abs(q - hi) % TWO_PI
        db = min(db, TWO_PI - db)
        return min(da, db)
    if q < lo:
        return lo - q
    if q > hi:
        return q - hi
    return 0.0


class _Node:
    __slots__ = ("lo", "hi", "axis", "split", "left", "right", "ids", "feats", "count")

    def __init__(self, dim: int):
        self.lo = np.full(dim, math.inf)
        self.hi = np.full(dim, -math.inf)
        self.axis = -1
        self.split = 0.0
        self.left: Optional[_Node] = None
        self.right: Optional[_Node] = None
        # leaf storage; ids/feats are None on interior nodes
        self.ids: Optional[List[int]] = []
        self.feats = np.empty((0, dim))
        self.count = 0


class SpatialIndex:
    """Incremental bucketed kd-tree over the feature embedding of a DistanceSpec."""

    def __init__(self, spec: DistanceSpec, approximate: bool = False, eps: float = 0.25):
        self.spec = spec
        self.approximate = approximate
        self.eps = eps
        self._axes = [i for i, w in enumerate(spec.weights) if w > 0.0]
        self._angular = [spec.kinds[i] == ANGULAR for i in range(spec.feature_dim)]
        self._ang_axes = [i for i in self._axes if self._angular[i]]
        self._weights = spec.weights
        self._states: dict[int, np.ndarray] = {}
        self._root = _Node(spec.feature_dim)

    def __len__(self) -> int:
        return len(self._states)

    def insert(self, point_id: int, state: np.ndarray) -> None:
        if point_id in self._states:
            raise DuplicateIdError(f"id {point_id} already in index")
        state = np.asarray(state, dtype=float)
        feat = np.asarray(self.spec.features(state), dtype=float)
        self._states[point_id] = state
        node, depth = self._root, 0
        while True:
            np.minimum(node.lo, feat, out=node.lo)
            np.maximum(node.hi, feat, out=node.hi)
            node.count += 1
            if node.ids is None:
                node = node.left if feat[node.axis] < node.split else node.right
                depth += 1
                continue
            node.ids.append(point_id)
            node.feats = np.vstack([node.feats, feat[None, :]])
            if len(node.ids) > BUCKET:
                self._split(node, depth)
            return

    def _split(self, node: _Node, depth: int) -> None:
        axis = self._axes[depth % len(self._axes)]
        values = node.feats[:, axis]
        split = float(np.median(values))
        mask = values < split
        # a degenerate axis (all values equal) keeps everything on one side;
        # fall back to any axis that actually separates the bucket
        if not mask.any() or mask.all():
            for alt in self._axes:
                values = node.feats[:, alt]
                split = float(np.median(values))
                mask = values < split
                if mask.any() and not mask.all():
                    axis = alt
                    break
            else:
                return  # all points identical in every indexed axis; oversized leaf
        dim = node.feats.shape[1]
        left, right = _Node(dim), _Node(dim)
        for child, sel in ((left, mask), (right, ~mask)):
            child.ids = [pid for pid, keep in zip(node.ids, sel) if keep]
            child.feats = node.feats[sel]
            child.count = len(child.ids)
            child.lo = child.feats.min(axis=0)
            child.hi = child.feats.max(axis=0)
        node.axis, node.split = axis, split
        node.left, node.right = left, right
        node.ids, node.feats = None, np.empty((0, dim))

    def _box_gap(self, node: _Node, fq: np.ndarray) -> float:
        acc = 0.0
        for i in self._axes:
            g = _axis_gap(fq[i], node.lo[i], node.hi[i], self._angular[i]) * self._weights[i]
            acc += g * g
        return math.sqrt(acc)

    def _leaf_dists(self, node: _Node, fq: np.ndarray) -> np.ndarray:
        diff = node.feats - fq
        for i in self._ang_axes:
            diff[:, i] = np.arctan2(np.sin(diff[:, i]), np.cos(diff[:, i]))
        diff = diff * self._weights
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def nearest(self, q: np.ndarray):
        """Return (id, state) of the metric-nearest point; ties to smallest id."""
        if not self._states:
            return None
        fq = np.asarray(self.spec.features(np.asarray(q, dtype=float)))
        best_d, best_id = math.inf, -1
        stack = [self._root]
        while stack:
            node = stack.pop()
            if node.count == 0 or self._box_gap(node, fq) > best_d:
                continue
            if node.ids is not None:
                d = self._leaf_dists(node, fq)
                for j in np.flatnonzero(d <= best_d):
                    pid = node.ids[j]
                    if (d[j], pid) < (best_d, best_id):
                        best_d, best_id = float(d[j]), pid
                continue
            near, far = node.left, node.right
            if fq[node.axis] >= node.split:
                near, far = far, near
            stack.append(far)
            stack.append(near)  # popped first: descend the near side first
        return best_id, self._states[best_id]

    def range(self, q: np.ndarray, r: float):
        """All points within r of q (exact mode). Approximate mode returns a
        superset whose extras lie within r * (1 + eps)."""
        if r < 0:
            raise KinoplanError(f"range radius must be >= 0, got {r}")
        if not self._states:
            return []
        fq = np.asarray(self.spec.features(np.asarray(q, dtype=float)))
        accept = r * (1.0 + self.eps) if self.approximate else r
        hits: List[int] = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            if node.count == 0 or self._box_gap(node, fq) > r:
                continue
            if node.ids is not None:
                d = self._leaf_dists(node, fq)
                hits.extend(node.ids[j] for j in np.flatnonzero(d <= accept))
                continue
            stack.append(node.left)
            stack.append(node.right)
        hits.sort()
        return [(pid, self._states[pid]) for pid in hits]


@dataclass
class RadiusSchedule:
    gamma: float
    dim: int
    exponent: str = "one-over-d-plus-one"  # or "one-over-d"
    cap: float = math.inf

    def __call__(self, n: int) -> float:
        if n < 1:
            raise KinoplanError(f"tree size must be >= 1, got {n}")
        power = 1.0 / (self.dim + 1) if self.exponent == "one-over-d-plus-one" else 1.0 / self.dim
        return min(self.gamma * (math.log(n) / n) ** power, self.cap)
