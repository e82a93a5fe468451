"""Exact k-nearest-neighbour search over a fixed point set.

Median-split k-d tree on the widest-spread axis. Queries are exact: results
match a brute-force scan, with distance ties broken by lower point index.
The tree is immutable after construction.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np


@dataclass
class _Node:
    axis: int
    point: int  # index into the point array
    left: "_Node | None"
    right: "_Node | None"


class KdTree:
    def __init__(self, points: np.ndarray):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise ValueError("points must be a 2-D array")
        self.points = points
        self.size = points.shape[0]
        self.dim = points.shape[1] if points.size else 0
        self._root = self._build(list(range(self.size))) if self.size else None

    def _build(self, idxs: list[int]) -> "_Node | None":
        if not idxs:
            return None
        pts = self.points[idxs]
        axis = int(np.argmax(pts.max(axis=0) - pts.min(axis=0))) if len(idxs) > 1 else 0
        idxs.sort(key=lambda i: (self.points[i, axis], i))
        mid = len(idxs) // 2
        return _Node(
            axis,
            idxs[mid],
            self._build(idxs[:mid]),
            self._build(idxs[mid + 1:]),
        )

    def query(self, target: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """k nearest points: (indices, distances) sorted by (distance, index)."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > self.size:
            raise ValueError(f"k={k} exceeds tree size {self.size}")
        target = np.asarray(target, dtype=np.float64)
        if target.shape != (self.dim,):
            raise ValueError(f"query must have shape ({self.dim},), got {target.shape}")

        # Max-heap of the current k best as (-d2, -idx); the root is the
        # worst kept candidate under the (distance, index) order.
        heap: list[tuple[float, int]] = []

        def consider(idx: int) -> None:
            d2 = float(np.dot(self.points[idx] - target, self.points[idx] - target))
            entry = (-d2, -idx)
            if len(heap) < k:
                heapq.heappush(heap, entry)
            elif entry > heap[0]:
                heapq.heapreplace(heap, entry)

        def visit(node: "_Node | None") -> None:
            if node is None:
                return
            consider(node.point)
            diff = target[node.axis] - self.points[node.point, node.axis]
            near, far = (node.right, node.left) if diff > 0 else (node.left, node.right)
            visit(near)
            # The far side may still hold an equal-distance lower-index point,
            # so prune only when the splitting plane is strictly farther.
            if len(heap) < k or diff * diff <= -heap[0][0]:
                visit(far)

        visit(self._root)
        best = sorted((-d2, -i) for d2, i in heap)
        idx = np.array([i for _, i in best], dtype=np.int64)
        dist = np.sqrt(np.array([d2 for d2, _ in best], dtype=np.float64))
        return idx, dist
