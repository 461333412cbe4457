"""Weighted state-space distance functions and edge cost evaluation.

Every system distance is a weighted Euclidean norm over a feature embedding of
the state (identity for most systems; the fixed-wing embeds its Cartesian
velocity). Angular features use shortest-angle differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import ANGULAR, LINEAR, Edge, KinoplanError, wrap_angle


@dataclass(frozen=True)
class DistanceSpec:
    weights: np.ndarray  # per-feature weight; 0 = excluded
    kinds: tuple  # per-feature "linear" | "angular"
    label: str = "full"
    embed: Optional[Callable[[np.ndarray], np.ndarray]] = None
    state_dim: Optional[int] = None  # dimension of raw states (defaults to feature dim)

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if np.all(self.weights == 0.0):
            raise KinoplanError("distance spec needs at least one positive weight")
        if len(self.kinds) != len(self.weights):
            raise KinoplanError("weights / kinds length mismatch")

    @property
    def feature_dim(self) -> int:
        return len(self.weights)

    def features(self, state: np.ndarray) -> np.ndarray:
        state = np.asarray(state, dtype=float)
        if self.embed is not None:
            return self.embed(state)
        return state

    def features_many(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        if self.embed is not None:
            return np.apply_along_axis(self.embed, -1, states)
        return states

    def expected_dim(self) -> int:
        return self.state_dim if self.state_dim is not None else len(self.weights)


def _feature_diff(spec: DistanceSpec, fa: np.ndarray, fb: np.ndarray) -> np.ndarray:
    diff = fa - fb
    for i, kind in enumerate(spec.kinds):
        if kind == ANGULAR:
            diff[..., i] = np.arctan2(np.sin(diff[..., i]), np.cos(diff[..., i]))
    return diff * spec.weights


def distance(spec: DistanceSpec, a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != spec.expected_dim() or b.shape[-1] != spec.expected_dim():
        raise KinoplanError(
            f"dimension mismatch: expected {spec.expected_dim()}, "
            f"got {a.shape[-1]} and {b.shape[-1]}"
        )
    diff = _feature_diff(spec, spec.features(a), spec.features(b))
    return float(np.sqrt(np.dot(diff, diff)))


def distance_many(spec: DistanceSpec, states: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from each row of `states` to the single state `b`."""
    states = np.asarray(states, dtype=float)
    if states.size == 0:
        return np.zeros(0)
    diff = _feature_diff(spec, spec.features_many(states), spec.features(b))
    return np.sqrt(np.sum(diff * diff, axis=-1))


def feature_distance_many(spec: DistanceSpec, feats: np.ndarray, fq: np.ndarray) -> np.ndarray:
    diff = _feature_diff(spec, feats, fq)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def edge_cost(spec: DistanceSpec, e: Edge) -> float:
    return float(samples_cost(spec, e.states))


def samples_cost(spec: DistanceSpec, states: np.ndarray) -> float:
    """Sum of consecutive-sample distances along a sampled trajectory."""
    states = np.asarray(states, dtype=float)
    if len(states) < 2:
        return 0.0
    feats = spec.features_many(states)
    diff = feats[1:] - feats[:-1]
    for i, kind in enumerate(spec.kinds):
        if kind == ANGULAR:
            diff[:, i] = np.arctan2(np.sin(diff[:, i]), np.cos(diff[:, i]))
    diff = diff * spec.weights
    return float(np.sum(np.sqrt(np.sum(diff * diff, axis=1))))


def nd_variant(spec: DistanceSpec, velocity_features: Sequence[int]) -> DistanceSpec:
    """Derive the no-dynamics distance by zeroing the velocity feature weights."""
    weights = spec.weights.copy()
    for i in velocity_features:
        weights[i] = 0.0
    return DistanceSpec(
        weights=weights,
        kinds=spec.kinds,
        label="no-dynamics",
        embed=spec.embed,
        state_dim=spec.state_dim,
    )
