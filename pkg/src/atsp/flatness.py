"""Flatness numbers, minimizing lines, orienting isometries and flat pairs.

Two backends compute the flatness number of a neighborhood:

``grid``
    minimizes over lines through two points of the grid
    ``phi(z) = c0 * scale * z / L + v`` with ``z`` in ``{-2L..2L}^N``.
    In the plane the search runs over primitive lattice directions with a
    width lower bound for pruning, so it is exact without visiting every
    pair of grid points. For ``N >= 3`` every grid pair is enumerated, which
    is only feasible for tiny grids.
``width``
    the exact half-width of the thinnest strip for ``N = 2`` (rotating
    calipers), and the best of all lines through two points of the
    neighborhood plus its principal axis for ``N >= 3``.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DistanceMeter,
    Line,
    ball_query,
    dists_to_line,
    null_meter,
    pairwise_distances,
)

# relative slack used only to collect ties before the lexicographic tie-break
_TIE_RTOL = 1e-12


class GridInfeasibleError(RuntimeError):
    """The grid search would exceed its evaluation budget."""


@dataclass(frozen=True)
class FlatnessParams:
    c0: float = 300.0
    grid_l: int | None = None
    backend: str = "width"
    flat_threshold: float = 1.0 / 16.0
    grid_budget: int = 5_000_000

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.backend not in ("width", "grid"):
            raise ValueError(f"unknown flatness backend {self.backend!r}")
        if not 0 < self.flat_threshold < 1:
            raise ValueError("flat_threshold must lie in (0, 1)")
        if self.grid_l is not None and self.grid_l < 1:
            raise ValueError("grid_l must be a positive integer")

    def required_grid_l(self, dim: int) -> int:
        return max(1, math.ceil(40 * self.c0 * math.sqrt(max(dim - 1, 0))))

    def grid_size(self, dim: int) -> int:
        if self.grid_l is not None:
            if dim >= 2 and self.grid_l < 40 * self.c0 * math.sqrt(dim - 1):
                warnings.warn(
                    f"grid_l={self.grid_l} is below 40*c0*sqrt(N-1); the grid "
                    "flatness number may exceed the width bound guarantee",
                    stacklevel=3,
                )
            return self.grid_l
        return self.required_grid_l(dim)


@dataclass(frozen=True)
class FlatnessResult:
    alpha: float
    line: Line
    neighborhood: tuple
    scale: float


@dataclass(frozen=True)
class OrientedFrame:
    """The isometry ``x -> A (x - origin)`` taking a line to the first axis."""

    matrix: np.ndarray
    origin: np.ndarray

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (x - self.origin) @ self.matrix.T

    def first(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (x - self.origin) @ self.matrix[0]


def canonical_direction(direction: np.ndarray) -> np.ndarray:
    """Return ``direction`` or its negation, whichever is lexicographically larger."""
    nz = np.flatnonzero(direction)
    if nz.size and direction[nz[0]] < 0:
        return -direction
    return direction


def orient(line: Line, origin) -> OrientedFrame:
    d = canonical_direction(line.direction)
    e1 = np.zeros_like(d)
    e1[0] = 1.0
    u = d - e1
    uu = float(u @ u)
    if uu == 0.0:
        a = np.eye(d.shape[0])
    else:
        # Householder reflection: symmetric, orthogonal, swaps d and e1
        a = np.eye(d.shape[0]) - 2.0 * np.outer(u, u) / uu
    return OrientedFrame(a, np.asarray(origin, dtype=np.float64).reshape(-1).copy())


def order_key(frame: OrientedFrame, points: np.ndarray) -> list:
    """Sort keys on the oriented images: first coordinate, then the rest."""
    images = frame.apply(points)
    return [tuple(row) for row in images]


def neighborhood(v, x_prime, scale: float, c0: float,
                 meter: DistanceMeter | None = None) -> np.ndarray:
    """Indices of ``x_prime`` inside the open ball of radius ``c0 * scale`` about ``v``."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    return ball_query(x_prime, v, c0 * scale, closed=False, meter=meter)


def _result(b: np.ndarray, line: Line, scale: float, indices) -> FlatnessResult:
    alpha = float(dists_to_line(b, line).max() / scale)
    return FlatnessResult(alpha, line, tuple(indices), scale)


def _axis_line(v: np.ndarray) -> Line:
    e1 = np.zeros_like(v)
    e1[0] = 1.0
    return Line(v, e1)


# ---------------------------------------------------------------- width backend

def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Counter-clockwise hull vertices (monotone chain), collinear points dropped."""
    pts = sorted(set(map(tuple, np.asarray(points, dtype=np.float64))))
    if len(pts) <= 2:
        return np.array(pts, dtype=np.float64).reshape(-1, 2)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)


def min_width_strip(points: np.ndarray):
    """Thinnest strip containing planar ``points``.

    Returns ``(width, edge_start, unit_direction, inward_normal)``; the
    optimal strip has one side flush with a hull edge, and the antipodal
    vertex for each edge is tracked with rotating calipers.
    """
    hull = convex_hull_2d(points)
    m = hull.shape[0]
    if m <= 2:
        if m == 1:
            return 0.0, hull[0], np.array([1.0, 0.0]), np.array([0.0, 1.0])
        d = hull[1] - hull[0]
        d = d / np.linalg.norm(d)
        return 0.0, hull[0], d, np.array([-d[1], d[0]])

    def height(i, j):
        a, b = hull[i], hull[(i + 1) % m]
        e = b - a
        return ((e[0] * (hull[j][1] - a[1]) - e[1] * (hull[j][0] - a[0]))
                / math.hypot(e[0], e[1]))

    best = None
    j = 1
    for i in range(m):
        if j == i:
            j = (j + 1) % m
        while height(i, (j + 1) % m) > height(i, j):
            j = (j + 1) % m
        w = height(i, j)
        if best is None or w < best[0]:
            best = (w, i)
    w, i = best
    a, b = hull[i], hull[(i + 1) % m]
    d = (b - a) / np.linalg.norm(b - a)
    return float(w), a, d, np.array([-d[1], d[0]])


def _width_line_2d(b: np.ndarray) -> Line:
    w, a, d, normal = min_width_strip(b)
    return Line(a + 0.5 * w * normal, d)


def _candidate_line_nd(b: np.ndarray) -> Line:
    m = b.shape[0]
    best_val, best_line = math.inf, None
    for i in range(m - 1):
        dirs = b[i + 1:] - b[i]
        norms = np.sqrt((dirs * dirs).sum(axis=1))
        dirs = dirs / norms[:, None]
        rel = b - b[i]
        along = rel @ dirs.T
        # squared perpendicular distance of every point to every candidate line
        perp2 = (rel * rel).sum(axis=1)[:, None] - along * along
        worst = np.sqrt(np.maximum(perp2, 0.0).max(axis=0))
        j = int(np.argmin(worst))
        if worst[j] < best_val:
            best_val, best_line = float(worst[j]), Line(b[i], dirs[j])
    centroid = b.mean(axis=0)
    _, _, vt = np.linalg.svd(b - centroid)
    axis = Line(centroid, vt[0])
    if best_line is None or dists_to_line(b, axis).max() < dists_to_line(b, best_line).max():
        best_line = axis
    return best_line


def alpha_width(v, b, scale: float, indices=()) -> FlatnessResult:
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1, v.shape[0])
    if b.shape[0] == 0:
        raise ValueError("neighborhood must be nonempty")
    if scale <= 0:
        raise ValueError("scale must be positive")
    n_dim = v.shape[0]
    if n_dim == 1:
        return FlatnessResult(0.0, _axis_line(v), tuple(indices), scale)
    if b.shape[0] == 1:
        return _result(b, _axis_line(b[0]), scale, indices)
    if b.shape[0] == 2:
        return _result(b, Line.through(b[0], b[1]), scale, indices)
    line = _width_line_2d(b) if n_dim == 2 else _candidate_line_nd(b)
    return _result(b, line, scale, indices)


# ----------------------------------------------------------------- grid backend

def _egcd(a: int, b: int):
    if b == 0:
        return (1 if a >= 0 else -1), 0, abs(a)
    x, y, g = _egcd(b, a % b)
    return y, x - (a // b) * y, g


def _t_interval(x0: int, d: int, lo: int, hi: int):
    """Integer ``t`` with ``lo <= x0 + t*d <= hi`` as a closed interval (or None)."""
    if d == 0:
        return (-math.inf, math.inf) if lo <= x0 <= hi else None
    if d > 0:
        return -((x0 - lo) // d), (hi - x0) // d
    return -((hi - x0) // -d), (x0 - lo) // -d


def _line_points_2d(c: int, d1: int, d2: int, big_l: int):
    """First two lattice points (lexicographic) of ``{x : x1*d2 - x2*d1 = c}`` in the box.

    Returns None unless the line meets at least two grid points.
    """
    p, q, _ = _egcd(d2, d1)
    x1, x2 = p * c, -q * c
    lo_t, hi_t = -math.inf, math.inf
    for x0, d in ((x1, d1), (x2, d2)):
        iv = _t_interval(x0, d, -2 * big_l, 2 * big_l)
        if iv is None:
            return None
        lo_t, hi_t = max(lo_t, iv[0]), min(hi_t, iv[1])
    if hi_t - lo_t < 1:
        return None
    t = lo_t
    return (x1 + t * d1, x2 + t * d2), (x1 + (t + 1) * d1, x2 + (t + 1) * d2)


def _primitive_directions(big_l: int) -> np.ndarray:
    span = 4 * big_l
    d1, d2 = np.meshgrid(np.arange(0, span + 1), np.arange(-span, span + 1), indexing="ij")
    d1, d2 = d1.ravel(), d2.ravel()
    keep = (np.gcd(d1, d2) == 1) & ((d1 > 0) | (d2 > 0))
    return np.stack([d1[keep], d2[keep]], axis=1)


def _alpha_grid_2d(v, b, scale, c0, big_l, budget):
    n_dirs = (4 * big_l + 1) * (8 * big_l + 1)
    if n_dirs > budget:
        raise GridInfeasibleError(
            f"grid search over ~{n_dirs} lattice directions exceeds the budget "
            f"of {budget}; use the 'width' backend")
    unit = c0 * scale / big_l
    w = (b - v) / unit
    dirs = _primitive_directions(big_l)
    d1 = dirs[:, 0].astype(np.float64)
    d2 = dirs[:, 1].astype(np.float64)
    lo = np.full(dirs.shape[0], np.inf)
    hi = np.full(dirs.shape[0], -np.inf)
    for wz in w:
        proj = wz[0] * d2 - wz[1] * d1
        np.minimum(lo, proj, out=lo)
        np.maximum(hi, proj, out=hi)
    norms = np.sqrt(d1 * d1 + d2 * d2)
    lower = (hi - lo) / (2.0 * norms)
    order = np.argsort(lower, kind="stable")

    best = math.inf
    candidates = []
    for idx in order:
        if lower[idx] > best * (1 + _TIE_RTOL):
            break
        a, bb = int(dirs[idx, 0]), int(dirs[idx, 1])
        lo_i, hi_i, norm = lo[idx], hi[idx], norms[idx]
        mid = 0.5 * (lo_i + hi_i)
        c_max = 2 * big_l * (a + abs(bb))
        for c, step in ((math.floor(mid), -1), (math.floor(mid) + 1, 1)):
            while -c_max <= c <= c_max:
                dev = max(hi_i - c, c - lo_i) / norm
                if dev > best * (1 + _TIE_RTOL):
                    break
                pair = _line_points_2d(c, a, bb, big_l)
                if pair is not None:
                    candidates.append((dev, pair))
                    best = min(best, dev)
                c += step
    if not candidates:
        raise GridInfeasibleError("no grid line found")
    cutoff = best * (1 + _TIE_RTOL)
    pair = min(p for dev, p in candidates if dev <= cutoff)
    x = np.asarray(pair[0], dtype=np.float64) * unit + v
    y = np.asarray(pair[1], dtype=np.float64) * unit + v
    return Line.through(x, y)


def _alpha_grid_nd(v, b, scale, c0, big_l, budget):
    n_dim = v.shape[0]
    n_pts = (4 * big_l + 1) ** n_dim
    n_pairs = n_pts * (n_pts - 1) // 2
    if n_pairs > budget:
        raise GridInfeasibleError(
            f"grid search over {n_pairs} point pairs exceeds the budget of "
            f"{budget}; use the 'width' backend")
    unit = c0 * scale / big_l
    grid = np.array(list(itertools.product(range(-2 * big_l, 2 * big_l + 1), repeat=n_dim)),
                    dtype=np.float64) * unit + v
    best_val, best_pair = math.inf, None
    for i in range(n_pts - 1):
        dirs = grid[i + 1:] - grid[i]
        dirs /= np.sqrt((dirs * dirs).sum(axis=1))[:, None]
        rel = b - grid[i]
        along = rel @ dirs.T
        perp2 = (rel * rel).sum(axis=1)[:, None] - along * along
        worst = np.sqrt(np.maximum(perp2, 0.0).max(axis=0))
        j = int(np.argmin(worst))
        if worst[j] < best_val * (1 - _TIE_RTOL):
            best_val, best_pair = float(worst[j]), (i, i + 1 + j)
    return Line.through(grid[best_pair[0]], grid[best_pair[1]])


def alpha_grid(v, b, scale: float, params: FlatnessParams, indices=()) -> FlatnessResult:
    """Flatness number over lines through pairs of grid points.

    Ties (within a relative ``1e-12``) are broken by the lexicographically
    smallest pair of grid indices spanning the line.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1, v.shape[0])
    if b.shape[0] == 0:
        raise ValueError("neighborhood must be nonempty")
    if scale <= 0:
        raise ValueError("scale must be positive")
    n_dim = v.shape[0]
    if n_dim == 1:
        return FlatnessResult(0.0, _axis_line(v), tuple(indices), scale)
    big_l = params.grid_size(n_dim)
    if n_dim == 2:
        line = _alpha_grid_2d(v, b, scale, params.c0, big_l, params.grid_budget)
    else:
        line = _alpha_grid_nd(v, b, scale, params.c0, big_l, params.grid_budget)
    return _result(b, line, scale, indices)


def compute_alpha(v, b, scale: float, params: FlatnessParams, indices=()) -> FlatnessResult:
    if params.backend == "grid":
        return alpha_grid(v, b, scale, params, indices)
    return alpha_width(v, b, scale, indices)


def flatness(points: np.ndarray, v: int, x_prime, scale: float, params: FlatnessParams,
             meter: DistanceMeter | None = None) -> FlatnessResult:
    """Flatness of the cloud indices ``x_prime`` around cloud index ``v``.

    The returned neighborhood holds cloud indices, ascending.
    """
    x_prime = np.asarray(x_prime, dtype=np.intp)
    local = neighborhood(points[v], points[x_prime], scale, params.c0, meter)
    members = np.sort(x_prime[local])
    if members.size == 0:
        # v outside x_prime: the neighborhood is still measured about v
        members = np.array([v], dtype=np.intp)
    return compute_alpha(points[v], points[members], scale, params,
                         indices=tuple(int(i) for i in members))


def flat_pairs(points: np.ndarray, v: int, x, x_prime, eps: float, k: int,
               params: FlatnessParams, meter: DistanceMeter | None = None,
               alpha_result: FlatnessResult | None = None) -> list:
    """Flat pairs ``{v, v'}`` of the net ``x`` (cloud indices) at ``v``.

    ``x`` is an ``eps``-net and ``x_prime`` a ``eps * 2**-k``-net containing
    it. ``v'`` is the nearest point of ``x`` inside the ball of radius
    ``c0 * eps * 2**-(k+1)`` on either side of ``v`` along the minimizing
    line, kept only when ``eps <= |v - v'| < c0 * eps * 2**-(k+1)``. Pairs are
    returned as ascending index tuples.
    """
    meter = meter if meter is not None else null_meter()
    x = np.asarray(x, dtype=np.intp)
    if v not in set(x.tolist()):
        raise ValueError(f"vertex {v} is not a member of the net")
    radius = params.c0 * eps * 2.0 ** (-(k + 1))
    local = ball_query(points[x], points[v], radius, closed=False, meter=meter)
    near = [int(i) for i in x[local] if int(i) != v]
    if not near:
        return []
    if alpha_result is None:
        alpha_result = flatness(points, v, x_prime, eps * 2.0 ** (-k), params, meter)
    if alpha_result.alpha > params.flat_threshold:
        return []
    frame = orient(alpha_result.line, points[v])
    keys = order_key(frame, points[near])
    left = [(key, i) for key, i in zip(keys, near) if key[0] < 0]
    right = [(key, i) for key, i in zip(keys, near) if key[0] > 0]
    chosen = []
    if left:
        chosen.append(max(left)[1])
    if right:
        chosen.append(min(right)[1])
    out = []
    for w in chosen:
        meter.add(1)
        dist = float(pairwise_distances(points[v:v + 1], points[w:w + 1])[0, 0])
        if eps <= dist < radius:
            out.append((min(v, w), max(v, w)))
    return out
