"""Points, metrics, neighborhoods and the instrumented distance meter.

Every distance that the solver computes goes through :func:`pairwise_distances`
so that the same floating-point expression is used everywhere; the net
invariants are compared with exact ``<``/``>=`` and stay bit-reproducible.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

PHASES = ("net-refinement", "flatness", "edge-assembly", "tour")


def as_points(points, dim=None) -> np.ndarray:
    """Coerce ``points`` to a finite float64 array of shape (n, N)."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array of points, got shape {arr.shape}")
    if dim is not None and arr.shape[0] and arr.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix between the rows of ``a`` and ``b``."""
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


@dataclass
class DistanceMeter:
    """Counts point-pair distance evaluations, split by pipeline phase.

    Use :meth:`phase` to attribute counts; anything counted outside a phase
    block lands in ``"other"``.
    """

    pair_evaluations: int = 0
    by_phase: dict = field(default_factory=lambda: {p: 0 for p in PHASES})
    _current: str = "other"

    def add(self, count: int) -> None:
        count = int(count)
        if count < 0:
            raise ValueError("meter counts are nonnegative")
        self.pair_evaluations += count
        self.by_phase[self._current] = self.by_phase.get(self._current, 0) + count

    @contextmanager
    def phase(self, name: str):
        previous = self._current
        self._current = name
        try:
            yield self
        finally:
            self._current = previous

    def snapshot(self) -> dict:
        return {"total": self.pair_evaluations, **dict(self.by_phase)}

    def merge(self, other: "DistanceMeter") -> None:
        """Add another meter's counts into this one (for per-task meters)."""
        self.pair_evaluations += other.pair_evaluations
        for key, value in other.by_phase.items():
            self.by_phase[key] = self.by_phase.get(key, 0) + value


class _NullMeter(DistanceMeter):
    def add(self, count: int) -> None:
        pass


def null_meter() -> DistanceMeter:
    """A meter that discards counts, for un-metered convenience calls."""
    return _NullMeter()


@dataclass(frozen=True)
class Line:
    anchor: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        anchor = np.asarray(self.anchor, dtype=np.float64).reshape(-1)
        direction = np.asarray(self.direction, dtype=np.float64).reshape(-1)
        if anchor.shape != direction.shape:
            raise ValueError("anchor and direction must have the same dimension")
        norm = np.linalg.norm(direction)
        if norm == 0 or not np.isfinite(norm):
            raise ValueError("line direction must be a nonzero finite vector")
        if abs(norm - 1.0) > 1e-12:
            direction = direction / norm
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "direction", direction)

    @classmethod
    def through(cls, p, q) -> "Line":
        p = np.asarray(p, dtype=np.float64)
        q = np.asarray(q, dtype=np.float64)
        return cls(p, q - p)

    @property
    def dim(self) -> int:
        return self.anchor.shape[0]


@dataclass(frozen=True)
class PointCloud:
    """A deduplicated finite point set with its enclosing scale ``r0``.

    ``r0`` is five times the largest Euclidean norm, so every point lies in
    the ball of radius ``r0 / 5`` and in the cube ``[-r0, r0]^N``.
    """

    points: np.ndarray
    r0: float
    dropped: int = 0

    @classmethod
    def from_points(cls, points, dim=None) -> "PointCloud":
        # adding 0.0 folds -0.0 into 0.0 so byte keys match float equality
        arr = as_points(points, dim) + 0.0
        if arr.shape[0] == 0:
            raise ValueError("point cloud must be nonempty")
        keep, seen = [], set()
        for i, row in enumerate(arr):
            key = row.tobytes()
            if key not in seen:
                seen.add(key)
                keep.append(i)
        unique = arr[keep]
        unique.setflags(write=False)
        r0 = 5.0 * float(np.max(np.sqrt((unique * unique).sum(axis=1))))
        return cls(unique, r0, arr.shape[0] - unique.shape[0])

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


def distance(a, b, meter: DistanceMeter | None = None) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(1, -1)
    b = np.asarray(b, dtype=np.float64).reshape(1, -1)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if meter is not None:
        meter.add(1)
    return float(pairwise_distances(a, b)[0, 0])


def dist_point_to_line(p, line: Line) -> float:
    return float(dists_to_line(np.asarray(p, dtype=np.float64).reshape(1, -1), line)[0])


def dists_to_line(points: np.ndarray, line: Line) -> np.ndarray:
    """Orthogonal distances from each row of ``points`` to ``line``."""
    points = np.asarray(points, dtype=np.float64)
    if points.shape[-1] != line.dim:
        raise ValueError(f"dimension mismatch: {points.shape[-1]} vs {line.dim}")
    rel = points - line.anchor
    along = rel @ line.direction
    perp = rel - along[:, None] * line.direction
    return np.sqrt((perp * perp).sum(axis=1))


def hausdorff_distance(a, b) -> float:
    a = as_points(a)
    b = as_points(b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("Hausdorff distance needs two nonempty sets")
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch")
    d = pairwise_distances(a, b)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def ball_query(points, center, radius: float, closed: bool = False,
               meter: DistanceMeter | None = None) -> np.ndarray:
    """Indices of rows of ``points`` inside the ball about ``center``.

    ``closed`` selects ``<=`` instead of ``<``. Returned indices are ascending.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if not (isinstance(points, np.ndarray) and points.dtype == np.float64
            and points.ndim == 2):
        points = as_points(points)
    center = np.asarray(center, dtype=np.float64).reshape(1, -1)
    if points.shape[0] == 0:
        return np.zeros(0, dtype=np.intp)
    if center.shape[1] != points.shape[1]:
        raise ValueError("dimension mismatch")
    if meter is not None:
        meter.add(points.shape[0])
    d = pairwise_distances(center, points)[0]
    mask = d <= radius if closed else d < radius
    return np.flatnonzero(mask)


def _row_index(v: np.ndarray) -> dict:
    return {row.tobytes(): i for i, row in enumerate(v)}


def is_maximal_net(x, v, eps: float) -> bool:
    """True iff ``x`` is an ``eps``-separated subset of ``v`` that cannot grow."""
    x = as_points(x)
    v = as_points(v, x.shape[1])
    if eps <= 0:
        raise ValueError("eps must be positive")
    index = _row_index(v + 0.0)
    members = set()
    for row in x + 0.0:
        key = row.tobytes()
        if key not in index:
            raise ValueError("x is not a subset of v")
        members.add(index[key])
    if x.shape[0] > 1:
        d = pairwise_distances(x, x)
        np.fill_diagonal(d, np.inf)
        if d.min() < eps:
            return False
    rest = [i for i in range(v.shape[0]) if i not in members]
    if not rest:
        return True
    if x.shape[0] == 0:
        return False
    return bool(pairwise_distances(v[rest], x).min(axis=1).max() < eps)
