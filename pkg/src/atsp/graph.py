"""Combinatorial graphs on cloud indices, components, and two-to-one tours."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .geometry import DistanceMeter


def edge_key(a: int, b: int) -> tuple:
    if a == b:
        raise ValueError(f"self-loop at vertex {a}")
    return (a, b) if a < b else (b, a)


@dataclass
class ScaleGraph:
    """Vertices and undirected edges; edges keep insertion order and a source tag."""

    vertices: list = field(default_factory=list)
    edges: dict = field(default_factory=dict)
    _vset: set = field(default_factory=set, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = sorted(set(int(v) for v in self.vertices))
        self._vset = set(self.vertices)
        raw = self.edges
        self.edges = {}
        items = raw.items() if isinstance(raw, dict) else ((e, None) for e in raw)
        for e, tag in items:
            self.add_edge(*e, tag=tag)

    def add_edge(self, a: int, b: int, tag=None) -> bool:
        """Insert ``{a, b}``; returns False if it was already present."""
        key = edge_key(int(a), int(b))
        if key[0] not in self._vset or key[1] not in self._vset:
            raise ValueError(f"edge {key} has an endpoint outside the vertex set")
        if key in self.edges:
            return False
        self.edges[key] = tag
        return True

    def edge_list(self) -> list:
        return list(self.edges)

    def adjacency(self) -> dict:
        adj = {v: [] for v in self.vertices}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def is_connected(self) -> bool:
        return len(components(self)) <= 1


def components(g: ScaleGraph) -> list:
    """Connected components as ascending vertex lists, ordered by smallest member."""
    adj = g.adjacency()
    seen = set()
    out = []
    for start in g.vertices:
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        out.append(sorted(comp))
    return out


@dataclass(frozen=True)
class TwoToOneTour:
    sequence: tuple

    def steps(self):
        return zip(self.sequence[:-1], self.sequence[1:])

    def __len__(self) -> int:
        return len(self.sequence)


def two_to_one_tour(g: ScaleGraph, v0: int) -> TwoToOneTour:
    """Closed walk from ``v0`` crossing every edge twice, once each way.

    Built by splicing: take the first unused edge (insertion order) touching
    the walk, and insert ``w, a`` right after the first occurrence of its
    walk endpoint ``a``.
    """
    if v0 not in set(g.vertices):
        raise ValueError(f"start vertex {v0} is not in the graph")
    if not g.is_connected():
        raise ValueError("two-to-one tour needs a connected graph")
    walk = [v0]
    first_pos = {v0: 0}
    unused = list(g.edges)
    while unused:
        for idx, (a, b) in enumerate(unused):
            pa, pb = first_pos.get(a), first_pos.get(b)
            if pa is None and pb is None:
                continue
            if pb is None or (pa is not None and pa <= pb):
                anchor, other, pos = a, b, pa
            else:
                anchor, other, pos = b, a, pb
            break
        else:  # pragma: no cover - excluded by the connectivity check
            raise ValueError("graph is disconnected")
        del unused[idx]
        walk[pos + 1:pos + 1] = [other, anchor]
        first_pos = {}
        for i, x in enumerate(walk):
            first_pos.setdefault(x, i)
    return TwoToOneTour(tuple(walk))


def tour_length(t: TwoToOneTour, points: np.ndarray,
                meter: DistanceMeter | None = None) -> float:
    seq = np.asarray(t.sequence, dtype=np.intp)
    if seq.size < 2:
        return 0.0
    if meter is not None:
        meter.add(seq.size - 1)
    a, b = points[seq[:-1]], points[seq[1:]]
    diff = a - b
    return math.fsum(np.sqrt((diff * diff).sum(axis=1)).tolist())


def edge_length_sum(g: ScaleGraph, points: np.ndarray) -> float:
    if not g.edges:
        return 0.0
    e = np.asarray(list(g.edges), dtype=np.intp)
    diff = points[e[:, 0]] - points[e[:, 1]]
    return math.fsum(np.sqrt((diff * diff).sum(axis=1)).tolist())
