"""Indexed binary min-heap with decrease-key, keyed by (key, id)."""

from __future__ import annotations

from .core import KinoplanError


class FrontierQueue:
    """Min-heap over node ids with a position map for O(log n) decrease-key.

    Ordering is by (key, id): equal keys pop in increasing id order. Keys can
    only be lowered; updates that would raise a key are rejected.
    """

    def __init__(self):
        self._heap: list[tuple[float, int]] = []  # (key, id)
        self._pos: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._heap)

    def __contains__(self, node_id: int) -> bool:
        return node_id in self._pos

    def key(self, node_id: int) -> float:
        return self._heap[self._pos[node_id]][0]

    def push(self, node_id: int, key: float) -> None:
        if node_id in self._pos:
            raise KinoplanError(f"id {node_id} already queued")
        self._heap.append((key, node_id))
        self._pos[node_id] = len(self._heap) - 1
        self._sift_up(len(self._heap) - 1)

    def pop_min(self):
        """Remove and return (id, key) with the smallest (key, id), or None."""
        if not self._heap:
            return None
        key, node_id = self._heap[0]
        last = self._heap.pop()
        del self._pos[node_id]
        if self._heap:
            self._heap[0] = last
            self._pos[last[1]] = 0
            self._sift_down(0)
        return node_id, key

    def decrease_key(self, node_id: int, new_key: float) -> bool:
        """Lower the key of `node_id` if present and smaller; no-op otherwise."""
        pos = self._pos.get(node_id)
        if pos is None:
            return False
        if new_key >= self._heap[pos][0]:
            return False
        self._heap[pos] = (new_key, node_id)
        self._sift_up(pos)
        return True

    def _sift_up(self, pos: int) -> None:
        item = self._heap[pos]
        while pos > 0:
            parent = (pos - 1) >> 1
            if item < self._heap[parent]:
                self._heap[pos] = self._heap[parent]
                self._pos[self._heap[pos][1]] = pos
                pos = parent
            else:
                break
        self._heap[pos] = item
        self._pos[item[1]] = pos

    def _sift_down(self, pos: int) -> None:
        item = self._heap[pos]
        n = len(self._heap)
        while True:
            child = 2 * pos + 1
            if child >= n:
                break
            if child + 1 < n and self._heap[child + 1] < self._heap[child]:
                child += 1
            if self._heap[child] < item:
                self._heap[pos] = self._heap[child]
                self._pos[self._heap[pos][1]] = pos
                pos = child
            else:
                break
        self._heap[pos] = item
        self._pos[item[1]] = pos

    def audit(self) -> None:
        for i in range(1, len(self._heap)):
            assert self._heap[(i - 1) >> 1] <= self._heap[i], "heap order violated"
        assert len(self._pos) == len(self._heap)
        for node_id, pos in self._pos.items():
            assert self._heap[pos][1] == node_id, "position map inconsistent"
