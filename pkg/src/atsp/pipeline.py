"""The multiscale solver: nets, vertex families, three edge sources, final tour.

A run walks the net ladder one level at a time. At level ``k`` the state
holds the net ``V_k``, the next net ``V_{k+1}`` (the lookahead), the split of
``V_k`` into non-flat and flat vertices, and a connected graph on ``V_k``.
One call to :func:`next_step` produces the state at level ``k + 1``.

Flatness numbers are always looked up through :meth:`RunContext.alpha`,
keyed by ``(vertex, level)``; the level fixes both the net the neighborhood
is drawn from and the scale ``r0 * 2**-n_level``, so the two cannot be mixed.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import mst_length
from .flatness import (
    FlatnessParams,
    FlatnessResult,
    compute_alpha,
    flat_pairs,
    neighborhood,
    orient,
)
from .geometry import DistanceMeter, PointCloud, ball_query, pairwise_distances
from .graph import ScaleGraph, TwoToOneTour, components, tour_length, two_to_one_tour
from .nets import NetLevel, dyadic_scale, initial_level, refine_net

RATIO_UPPER = 300.0 ** 4.5


class InvariantViolation(RuntimeError):
    """A strict-mode run broke the edge budget or connectivity."""

    def __init__(self, message: str, trace: "RunTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass
class StepRecord:
    level: int
    exponent: int
    net_size: int
    new_points: int
    edges: int
    edges_by_source: dict
    nonflat: int
    flat: int
    alpha_max: float | None
    budget_bound: int
    repairs: int = 0


@dataclass
class RunTrace:
    steps: list = field(default_factory=list)
    meter: dict = field(default_factory=dict)
    wall: dict = field(default_factory=dict)
    deviations: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "metadata": dict(self.metadata),
            "meter": dict(self.meter),
            "deviations": list(self.deviations),
            "steps": [vars(s).copy() for s in self.steps],
        }
        if timing:
            out["wall_seconds"] = dict(self.wall)
        return out


class RunContext:
    """Shared per-run data: cloud, parameters, ladder so far, flatness cache."""

    def __init__(self, cloud: PointCloud, params: FlatnessParams, meter: DistanceMeter,
                 mode: str = "strict"):
        if mode not in ("strict", "lenient"):
            raise ValueError(f"unknown mode {mode!r}")
        self.cloud = cloud
        self.points = cloud.points
        self.params = params
        self.meter = meter
        self.mode = mode
        self.levels: list = []
        self.trace = RunTrace()
        self._alpha: dict = {}
        self._by_members: dict = {}
        self._frames: dict = {}

    def level(self, k: int) -> NetLevel:
        return self.levels[k - 1]

    def scale(self, k: int) -> float:
        return dyadic_scale(self.cloud.r0, self.level(k).exponent)

    def refine(self, k: int) -> NetLevel:
        """Refine level ``k`` into level ``k + 1`` (once) and return it."""
        if len(self.levels) > k:
            return self.levels[k]
        lvl = self.level(k)
        start = time.perf_counter()
        with self.meter.phase("net-refinement"):
            _, nxt = refine_net(self.cloud, lvl, self.scale(k), self.meter)
        self._tick("net-refinement", start)
        self.levels.append(nxt)
        return nxt

    def alpha(self, v: int, k: int) -> FlatnessResult:
        """Flatness of net ``V_k`` around cloud index ``v`` at scale of level ``k``."""
        key = (v, k)
        hit = self._alpha.get(key)
        if hit is not None:
            return hit
        start = time.perf_counter()
        net = np.asarray(self.level(k).net, dtype=np.intp)
        scale = self.scale(k)
        with self.meter.phase("flatness"):
            local = neighborhood(self.points[v], self.points[net], scale,
                                 self.params.c0, self.meter)
        members = tuple(sorted(int(i) for i in net[local])) or (v,)
        # the width backend ignores the center, so equal neighborhoods share a result
        mkey = (members, k) if self.params.backend == "width" else (v, members, k)
        res = self._by_members.get(mkey)
        if res is None:
            res = compute_alpha(self.points[v], self.points[list(members)], scale,
                                self.params, indices=members)
            self._by_members[mkey] = res
        self._alpha[key] = res
        self._tick("flatness", start)
        return res

    def frame(self, v: int, k: int):
        """Orienting frame along the level-``k`` line of ``v``, centered at ``v``."""
        key = (v, k)
        hit = self._frames.get(key)
        if hit is None:
            hit = self._frames[key] = orient(self.alpha(v, k).line, self.points[v])
        return hit

    def is_flat(self, v: int, k: int) -> bool:
        return self.alpha(v, k).alpha <= self.params.flat_threshold

    def _tick(self, phase: str, start: float) -> None:
        self.trace.wall[phase] = self.trace.wall.get(phase, 0.0) + time.perf_counter() - start


@dataclass
class StepState:
    """Level ``k`` of a run.

    ``lookahead`` is ``V_{k+1}``; it is None once ``V_k`` is the whole cloud.
    The families split ``V_k`` and are empty in that terminal state.
    """

    k: int
    current: NetLevel
    lookahead: NetLevel | None
    nonflat: tuple
    flat: tuple
    graph: ScaleGraph
    context: RunContext = field(repr=False)
    after: NetLevel | None = None

    @property
    def terminal(self) -> bool:
        return self.lookahead is None


@dataclass
class EdgeSources:
    old: list
    flat: list
    nonflat: list
    covered_old: dict
    covered_flat: dict
    covered_nonflat: dict


@dataclass
class Solution:
    graph: ScaleGraph
    tour: TwoToOneTour
    tour_length: float
    mst_length: float
    trace: RunTrace
    cloud: PointCloud

    @property
    def ratio(self) -> float | None:
        if self.mst_length == 0:
            return None
        return self.tour_length / self.mst_length

    def to_metrics(self, timing: bool = False) -> dict:
        ratio = self.ratio
        return {
            "n": self.cloud.n,
            "dimension": self.cloud.dim,
            "r0": self.cloud.r0,
            "duplicates_dropped": self.cloud.dropped,
            "tour_length": self.tour_length,
            "mst_length": self.mst_length,
            "ratio_to_mst": ratio,
            "ratio_upper_bound_ln": RATIO_UPPER * float(np.log(300.0)),
            "ratio_upper_bound_log2": RATIO_UPPER * float(np.log2(300.0)),
            "edges": len(self.graph.edges),
            "levels": len(self.trace.steps) + 1,
            "tour": list(self.tour.sequence),
            "trace": self.trace.to_dict(timing=timing),
        }


def _key(a: int, b: int) -> tuple:
    return (a, b) if a < b else (b, a)


def _dist(points: np.ndarray, a: int, b: int, meter: DistanceMeter) -> float:
    meter.add(1)
    return float(pairwise_distances(points[a:a + 1], points[b:b + 1])[0, 0])


def _chain(seq: list) -> list:
    return [_key(a, b) for a, b in zip(seq[:-1], seq[1:])]


def step_one(cloud: PointCloud, params: FlatnessParams | None = None,
             meter: DistanceMeter | None = None, mode: str = "strict") -> StepState:
    params = params or FlatnessParams()
    meter = meter if meter is not None else DistanceMeter()
    if cloud.n == 0:
        raise ValueError("cannot solve an empty cloud")
    ctx = RunContext(cloud, params, meter, mode)
    ctx.trace.metadata = {
        "c0": params.c0,
        "backend": params.backend,
        "grid_l": params.grid_l,
        "flat_threshold": params.flat_threshold,
        "flat_comparison": "alpha <= threshold",
        "mode": mode,
        "scan_order": "ascending input index",
        "nonflat_flat_pairs": "pairs drawn from the next net at its own scale",
        "flat_side_chain_points": "next net",
        "flat_side_test_radius": "c0 * scale / 2",
    }
    ctx.levels.append(initial_level(cloud))
    graph = ScaleGraph([0])
    if cloud.n == 1:
        return StepState(1, ctx.level(1), None, (), (), graph, ctx)
    lookahead = ctx.refine(1)
    flat = ctx.is_flat(0, 2)
    return StepState(1, ctx.level(1), lookahead, () if flat else (0,), (0,) if flat else (),
                     graph, ctx)


def classify_vertices(state: StepState, params: FlatnessParams, meter: DistanceMeter):
    """Split ``V_{k+1}`` into (non-flat, flat) by flatness against ``V_{k+2}``."""
    if state.lookahead is None or not state.lookahead.residual:
        return (), ()
    if state.after is None:
        raise ValueError("classification needs the refined net two levels ahead")
    ctx = state.context
    nonflat, flat = [], []
    for v in sorted(state.lookahead.net):
        (flat if ctx.is_flat(v, state.k + 2) else nonflat).append(v)
    return tuple(nonflat), tuple(flat)


def edges_from_old(state: StepState, params: FlatnessParams, meter: DistanceMeter):
    """Keep or subdivide each edge of ``G_k`` along the flat endpoint's line."""
    ctx = state.context
    pts = ctx.points
    k1 = state.k + 1
    long_edge = params.c0 * ctx.scale(k1) / 2.0
    edges, covered = [], {}
    for u, w in state.graph.edges:
        length = _dist(pts, u, w, meter)
        fu, fw = ctx.alpha(u, k1), ctx.alpha(w, k1)
        thr = params.flat_threshold
        if length >= long_edge or (fu.alpha > thr and fw.alpha > thr):
            edges.append((u, w))
            covered[(u, w)] = ()
            continue
        a, b, fa, fb = (u, w, fu, fw) if fu.alpha <= thr else (w, u, fw, fu)
        frame = ctx.frame(a, k1)
        sign = 1.0 if frame.first(pts[b]) > 0 else -1.0
        target = sign * frame.first(pts[b])
        pool = sorted((set(fa.neighborhood) | set(fb.neighborhood)) - {a, b})
        inner = []
        if target > 0 and pool:
            images = frame.apply(pts[pool])
            images[:, 0] *= sign
            inner = sorted((tuple(img), p) for img, p in zip(images, pool)
                           if 0 < img[0] < target)
        mids = [p for _, p in inner]
        edges.extend(_chain([a, *mids, b]))
        covered[(u, w)] = tuple(mids)
    return edges, covered


def edges_from_flat(state: StepState, params: FlatnessParams, meter: DistanceMeter):
    """Extend the graph past flat vertices that have no old neighbor on a side."""
    ctx = state.context
    pts = ctx.points
    k1 = state.k + 1
    old = set(state.current.net)
    nxt = np.asarray(state.lookahead.net, dtype=np.intp)
    reach = 2.0 * ctx.scale(k1)
    # the side test uses the flat-pair radius, matching the long-edge cutoff of
    # edges_from_old; with the full c0*scale ball a new point on a long edge
    # next to u is picked up by neither rule
    side_radius = params.c0 * ctx.scale(k1) / 2.0
    edges, covered = [], {}
    for u in sorted(state.flat):
        fu = ctx.alpha(u, k1)
        frame = ctx.frame(u, k1)
        cand = [p for p in fu.neighborhood if p in old and p != u]
        if cand:
            hit = ball_query(pts[cand], pts[u], side_radius, closed=False, meter=meter)
            cand = [cand[i] for i in hit]
        olds = cand
        firsts = frame.first(pts[olds]) if olds else np.zeros(0)
        has_left, has_right = bool((firsts < 0).any()), bool((firsts > 0).any())
        if has_left and has_right:
            continue
        local = ball_query(pts[nxt], pts[u], reach, closed=True, meter=meter)
        near = [int(p) for p in nxt[local] if int(p) != u]
        keyed = sorted((tuple(img), p) for img, p in zip(frame.apply(pts[near]), near)) \
            if near else []
        new_pts = []
        if not has_left:
            left = [p for img, p in keyed if img[0] < 0]
            edges.extend(_chain([*left, u]))
            new_pts.extend(left)
        if not has_right:
            right = [p for img, p in reversed(keyed) if img[0] > 0]
            edges.extend(_chain([*right, u]))
            new_pts.extend(right)
        covered[u] = tuple(p for p in new_pts if p not in old)
    return edges, covered


def edges_from_nonflat(state: StepState, old_edges: list, flat_edges: list,
                       params: FlatnessParams, meter: DistanceMeter):
    """Connect uncovered new points near each non-flat vertex.

    Non-flat vertices are processed in ascending index. Around ``u`` the
    uncovered points of ``V_{k+1}`` within ``c0 * scale`` gather their flat
    pairs; the components of the auxiliary graph on those points, their
    pair partners and ``u`` itself are joined by a star from the smallest
    index of the first component.
    """
    ctx = state.context
    pts = ctx.points
    k1 = state.k + 1
    scale = ctx.scale(k1)
    nxt = np.asarray(state.lookahead.net, dtype=np.intp)
    covered_pts = {p for e in (*old_edges, *flat_edges) for p in e}
    edges, covered = [], {}
    for u in sorted(state.nonflat):
        local = ball_query(pts[nxt], pts[u], params.c0 * scale, closed=False, meter=meter)
        ball = sorted(int(p) for p in nxt[local])
        fresh = [p for p in ball if p not in covered_pts]
        if not fresh:
            continue
        pairs = []
        for p in fresh:
            for pair in flat_pairs(pts, p, nxt, nxt, scale, 0, params, meter,
                                   alpha_result=ctx.alpha(p, k1)):
                if pair not in pairs:
                    pairs.append(pair)
        aux_vertices = {u, *fresh} | {p for e in pairs for p in e}
        aux = ScaleGraph(sorted(aux_vertices), pairs)
        comps = components(aux)
        local_edges = list(pairs)
        if len(comps) > 1:
            hub = comps[0][0]
            local_edges.extend(_key(hub, c[0]) for c in comps[1:])
        edges.extend(local_edges)
        covered[u] = tuple(fresh)
        covered_pts.update(p for e in local_edges for p in e)
    return edges, covered


def _bridge(graph: ScaleGraph, pts: np.ndarray, meter: DistanceMeter) -> list:
    """Join components by repeatedly adding the shortest inter-component pair."""
    added = []
    comps = components(graph)
    while len(comps) > 1:
        label = {v: i for i, c in enumerate(comps) for v in c}
        verts = np.asarray(graph.vertices, dtype=np.intp)
        d = pairwise_distances(pts[verts], pts[verts])
        meter.add(d.size)
        labels = np.array([label[int(v)] for v in verts])
        d[labels[:, None] == labels[None, :]] = np.inf
        i, j = np.unravel_index(int(np.argmin(d)), d.shape)
        e = _key(int(verts[i]), int(verts[j]))
        graph.add_edge(*e, tag="repair")
        added.append(e)
        comps = components(graph)
    return added


def _overlaps(groups: list) -> list:
    seen, clashes = {}, []
    for name, pts in groups:
        for p in pts:
            if p in seen and seen[p] != name:
                clashes.append((p, seen[p], name))
            seen.setdefault(p, name)
    return clashes


def assemble_step(state: StepState, sources: EdgeSources, families: tuple,
                  params: FlatnessParams, meter: DistanceMeter) -> StepState:
    """Union the three edge sources into ``G_{k+1}`` and check its invariants."""
    ctx = state.context
    nxt = state.lookahead
    prev_size = len(state.current.net)
    if len(nxt.net) <= prev_size:
        raise ValueError("next net does not grow the current one")
    graph = ScaleGraph(list(nxt.net))
    counts = {"E1": 0, "E2": 0, "E3": 0}
    for tag, group in (("E1", sources.old), ("E2", sources.flat), ("E3", sources.nonflat)):
        for e in group:
            if graph.add_edge(*e, tag=tag):
                counts[tag] += 1

    level = state.k + 1
    clashes = _overlaps(
        [(("edge",) + e, pts) for e, pts in sources.covered_old.items()]
        + [(("flat", u), pts) for u, pts in sources.covered_flat.items()]
        + [(("nonflat", u), pts) for u, pts in sources.covered_nonflat.items()])
    if clashes:
        ctx.trace.deviations.append({
            "level": level, "kind": "overlapping-new-point-groups",
            "count": len(clashes)})

    new_points = len(nxt.net) - prev_size
    fine_bound = prev_size + 2 * new_points
    if len(graph.edges) > fine_bound:
        ctx.trace.deviations.append({
            "level": level, "kind": "edge-count-above-old-plus-twice-new",
            "edges": len(graph.edges), "bound": fine_bound})

    problems = []
    if len(graph.edges) > 2 * len(nxt.net):
        problems.append(f"edge budget exceeded at level {level}: "
                        f"{len(graph.edges)} > {2 * len(nxt.net)}")
    repairs = 0
    if not graph.is_connected():
        if ctx.mode == "lenient":
            added = _bridge(graph, ctx.points, meter)
            repairs = len(added)
            ctx.trace.deviations.append({
                "level": level, "kind": "connectivity-repair",
                "edges": [list(e) for e in added]})
        else:
            problems.append(f"graph at level {level} is disconnected")

    nonflat, flat = families
    alphas = [ctx.alpha(v, level + 1).alpha for v in (*nonflat, *flat)]
    ctx.trace.steps.append(StepRecord(
        level=level,
        exponent=nxt.exponent,
        net_size=len(nxt.net),
        new_points=new_points,
        edges=len(graph.edges),
        edges_by_source=counts,
        nonflat=len(nonflat),
        flat=len(flat),
        alpha_max=max(alphas) if alphas else None,
        budget_bound=2 * len(nxt.net),
        repairs=repairs,
    ))
    if problems:
        ctx.trace.meter = meter.snapshot()
        raise InvariantViolation("; ".join(problems), ctx.trace)
    return StepState(level, nxt, state.after, nonflat, flat, graph, ctx)


def next_step(state: StepState) -> StepState:
    ctx = state.context
    params, meter = ctx.params, ctx.meter
    if state.terminal:
        raise ValueError("the run is already complete")
    if state.lookahead.residual:
        state.after = ctx.refine(state.k + 1)
    families = classify_vertices(state, params, meter)
    start = time.perf_counter()
    with meter.phase("edge-assembly"):
        e1, cov1 = edges_from_old(state, params, meter)
        e2, cov2 = edges_from_flat(state, params, meter)
        e3, cov3 = edges_from_nonflat(state, e1, e2, params, meter)
        sources = EdgeSources(e1, e2, e3, cov1, cov2, cov3)
        nxt = assemble_step(state, sources, families, params, meter)
    ctx._tick("edge-assembly", start)
    return nxt


def solve(cloud: PointCloud, params: FlatnessParams | None = None, mode: str = "strict",
          meter: DistanceMeter | None = None) -> Solution:
    """Run every level, then walk the final graph from the first input point."""
    params = params or FlatnessParams()
    meter = meter if meter is not None else DistanceMeter()
    state = step_one(cloud, params, meter, mode)
    while not state.terminal:
        state = next_step(state)
    ctx = state.context
    start = time.perf_counter()
    with meter.phase("tour"):
        tour = two_to_one_tour(state.graph, 0)
        length = tour_length(tour, cloud.points, meter)
    ctx._tick("tour", start)
    ctx.trace.meter = meter.snapshot()
    return Solution(state.graph, tour, length, mst_length(cloud), ctx.trace, cloud)
