"""Reference tours and trees: Euclidean MST, nearest insertion, exact optimum."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import PointCloud, pairwise_distances

EXACT_LIMIT = 10
HELD_KARP_FROM = 8


def _points(cloud) -> np.ndarray:
    return cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)


def mst_length(cloud) -> float:
    """Total length of a Euclidean minimum spanning tree (dense Prim)."""
    pts = _points(cloud)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("empty cloud")
    if n == 1:
        return 0.0
    d = pairwise_distances(pts, pts)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = d[0].copy()
    lengths = []
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        j = int(np.argmin(cand))
        lengths.append(float(cand[j]))
        in_tree[j] = True
        best = np.minimum(best, d[j])
    return math.fsum(lengths)


def cycle_length(points: np.ndarray, cycle) -> float:
    if len(cycle) < 2:
        return 0.0
    idx = np.asarray(list(cycle) + [cycle[0]], dtype=np.intp)
    diff = points[idx[1:]] - points[idx[:-1]]
    return math.fsum(np.sqrt((diff * diff).sum(axis=1)).tolist())


def nearest_insertion_tour(cloud, start: int = 0):
    """Classic nearest insertion; returns ``(cycle, length)``.

    The next city is the one closest to the current cycle (lowest index on
    ties) and it goes where it lengthens the cycle least (earliest slot on
    ties).
    """
    pts = _points(cloud)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("empty cloud")
    d = pairwise_distances(pts, pts)
    cycle = [start]
    outside = np.ones(n, dtype=bool)
    outside[start] = False
    near = d[start].copy()
    while outside.any():
        j = int(np.argmin(np.where(outside, near, np.inf)))
        if len(cycle) == 1:
            cycle.append(j)
        else:
            a = np.asarray(cycle)
            b = np.roll(a, -1)
            cost = d[a, j] + d[j, b] - d[a, b]
            slot = int(np.argmin(cost))
            cycle.insert(slot + 1, j)
        outside[j] = False
        near = np.minimum(near, d[j])
    return cycle, cycle_length(pts, cycle)


def _held_karp(d: np.ndarray) -> float:
    n = d.shape[0]
    full = 1 << (n - 1)
    cost = np.full((full, n - 1), np.inf)
    for j in range(n - 1):
        cost[1 << j, j] = d[0, j + 1]
    for mask in range(1, full):
        for j in range(n - 1):
            if not mask & (1 << j) or cost[mask, j] == np.inf:
                continue
            base = cost[mask, j]
            for nxt in range(n - 1):
                if mask & (1 << nxt):
                    continue
                m2 = mask | (1 << nxt)
                val = base + d[j + 1, nxt + 1]
                if val < cost[m2, nxt]:
                    cost[m2, nxt] = val
    return float(min(cost[full - 1, j] + d[j + 1, 0] for j in range(n - 1)))


def optimal_cycle_length(cloud) -> float:
    """Exact shortest closed tour; permutations below 8 points, Held-Karp up to 10."""
    pts = _points(cloud)
    n = pts.shape[0]
    if n > EXACT_LIMIT:
        raise ValueError(f"exact tour limited to {EXACT_LIMIT} points, got {n}")
    if n < 2:
        return 0.0
    d = pairwise_distances(pts, pts)
    if n >= HELD_KARP_FROM:
        return _held_karp(d)
    best = np.inf
    for perm in itertools.permutations(range(1, n)):
        order = (0, *perm, 0)
        total = sum(d[a, b] for a, b in zip(order[:-1], order[1:]))
        best = min(best, total)
    return float(best)


@dataclass
class BaselineReport:
    mst_length: float
    nearest_insertion_length: float
    optimal_cycle_length: float | None
    atsp_tour_length: float

    @property
    def ratios(self) -> dict:
        def ratio(a, b):
            return None if not b else a / b

        return {
            "atsp_over_mst": ratio(self.atsp_tour_length, self.mst_length),
            "atsp_over_nearest_insertion": ratio(self.atsp_tour_length,
                                                 self.nearest_insertion_length),
            "atsp_over_optimal": (ratio(self.atsp_tour_length, self.optimal_cycle_length)
                                  if self.optimal_cycle_length is not None else None),
            "nearest_insertion_over_optimal": (
                ratio(self.nearest_insertion_length, self.optimal_cycle_length)
                if self.optimal_cycle_length is not None else None),
        }


def baseline_report(cloud: PointCloud, atsp_tour_length: float) -> BaselineReport:
    _, ni = nearest_insertion_tour(cloud)
    opt = optimal_cycle_length(cloud) if cloud.n <= EXACT_LIMIT else None
    return BaselineReport(mst_length(cloud), ni, opt, atsp_tour_length)
