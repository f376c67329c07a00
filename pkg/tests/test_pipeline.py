import numpy as np
import pytest

from atsp import pipeline
from atsp.bench import sharpness_family
from atsp.flatness import FlatnessParams
from atsp.geometry import DistanceMeter, PointCloud
from atsp.graph import ScaleGraph, edge_length_sum
from atsp.nets import NetLevel
from atsp.pipeline import (
    EdgeSources,
    InvariantViolation,
    RunContext,
    StepState,
    classify_vertices,
    edges_from_nonflat,
    next_step,
    solve,
    step_one,
)


def cloud(pts):
    return PointCloud.from_points(np.asarray(pts, dtype=float))


def test_single_point():
    st = step_one(cloud([[2.0, 1.0]]))
    assert st.terminal and st.graph.vertices == [0] and not st.graph.edges
    sol = solve(cloud([[2.0, 1.0]]))
    assert sol.tour.sequence == (0,) and sol.tour_length == 0 and sol.ratio is None


def test_step_one_two_points():
    st = step_one(cloud([[0.0], [1.0]]))
    assert st.lookahead.exponent == 3 and st.lookahead.net == (0, 1)
    assert st.flat == (0,) and st.nonflat == ()


def test_step_one_dyadic_family_flat():
    st = step_one(PointCloud.from_points(sharpness_family(12)))
    assert st.flat == (0,)


def test_classify_collinear_all_flat():
    t = np.linspace(0, 1, 20)
    st = step_one(cloud(np.stack([t, 2 * t], axis=1)))
    while not st.terminal:
        assert st.nonflat == ()
        st = next_step(st)


def test_classify_cross_has_nonflat():
    arm = np.linspace(-1, 1, 9)
    pts = np.concatenate([np.stack([arm, 0 * arm], 1), np.stack([0 * arm, arm], 1)[[0, 1, 2, 3, 5, 6, 7, 8]]])
    pts = np.concatenate([[[0.0, 0.0]], np.delete(pts, 4, axis=0)])
    st = step_one(cloud(pts), FlatnessParams(c0=4))
    seen_nonflat = False
    while not st.terminal:
        for v in st.nonflat:
            assert st.context.alpha(v, st.k + 1).alpha > 1 / 16
            seen_nonflat = True
        st = next_step(st)
    assert seen_nonflat


def test_classify_skipped_without_residual():
    st = step_one(cloud([[0.0], [1.0]]))
    assert st.lookahead.residual == ()
    assert classify_vertices(st, st.context.params, st.context.meter) == ((), ())


def test_old_edge_subdivided():
    sol = solve(cloud([[0.0], [1.0], [0.5]]))
    assert sol.graph.edges == {(0, 2): "E1", (1, 2): "E1"}
    assert [s.edges_by_source for s in sol.trace.steps] == [
        {"E1": 0, "E2": 1, "E3": 0}, {"E1": 2, "E2": 0, "E3": 0}]


def _manual_state(pts, levels, nonflat, params):
    c = cloud(pts)
    ctx = RunContext(c, params, DistanceMeter())
    ctx.levels = levels
    return StepState(1, levels[0], levels[1], nonflat, (), ScaleGraph(levels[0].net), ctx)


def test_nonflat_star_joins_isolated_points():
    d = 1.0
    ang = np.deg2rad([90.0, 210.0, 330.0])
    pts = [[0.0, 0.0]] + [[d * np.cos(a), d * np.sin(a)] for a in ang]
    params = FlatnessParams(c0=3)
    st = _manual_state(pts, [NetLevel(1, (0,), (1, 2, 3)), NetLevel(2, (0, 1, 2, 3), ())],
                       (0,), params)
    edges, covered = edges_from_nonflat(st, [], [], params, DistanceMeter())
    assert covered == {0: (0, 1, 2, 3)}
    assert sorted(edges) == [(0, 1), (0, 2), (0, 3)]
    assert ScaleGraph([0, 1, 2, 3], edges).is_connected()


def test_nonflat_nothing_when_covered():
    pts = [[0.0, 0.0], [0.0, 1.0]]
    params = FlatnessParams(c0=3)
    st = _manual_state(pts, [NetLevel(1, (0,), (1,)), NetLevel(2, (0, 1), ())], (0,), params)
    assert edges_from_nonflat(st, [(0, 1)], [], params, DistanceMeter()) == ([], {})
    assert edges_from_nonflat(st, [], [], params, DistanceMeter())[0] == [(0, 1)]


def test_assemble_guard_no_growth():
    pts = [[0.0], [1.0]]
    params = FlatnessParams()
    st = _manual_state(pts, [NetLevel(1, (0,), (1,)), NetLevel(1, (0,), (1,))], (), params)
    with pytest.raises(ValueError):
        pipeline.assemble_step(st, EdgeSources([], [], [], {}, {}, {}), ((), ()),
                               params, DistanceMeter())


@pytest.mark.parametrize("seed", range(8))
def test_budget_connectivity_and_lengths(seed):
    rng = np.random.default_rng(100 + seed)
    sol = solve(cloud(rng.random((int(rng.integers(2, 100)), 2))))
    for s in sol.trace.steps:
        assert s.edges <= 2 * s.net_size and s.repairs == 0
    assert sol.graph.is_connected() and sol.graph.vertices == list(range(sol.cloud.n))
    assert sol.tour.sequence[0] == sol.tour.sequence[-1] == 0
    assert sol.tour_length == pytest.approx(2 * edge_length_sum(sol.graph, sol.cloud.points))
    assert sol.tour_length >= 2 * sol.mst_length
    assert not sol.trace.deviations


def test_determinism():
    pts = np.random.default_rng(9).random((60, 3))
    a, b = solve(cloud(pts)), solve(cloud(pts))
    assert a.to_metrics() == b.to_metrics()


def test_strict_raises_and_lenient_repairs(monkeypatch):
    monkeypatch.setattr(pipeline, "edges_from_nonflat", lambda *a: ([], {}))
    pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
    with pytest.raises(InvariantViolation) as err:
        solve(cloud(pts), FlatnessParams(c0=4))
    assert "disconnected" in str(err.value) and err.value.trace.steps
    sol = solve(cloud(pts), FlatnessParams(c0=4), mode="lenient")
    assert sol.graph.is_connected()
    kinds = [d["kind"] for d in sol.trace.deviations]
    assert "connectivity-repair" in kinds
    assert sum(s.repairs for s in sol.trace.steps) > 0


def test_grid_backend_small_run():
    pts = np.random.default_rng(4).random((15, 2))
    with pytest.warns(UserWarning):
        sol = solve(cloud(pts), FlatnessParams(c0=2, grid_l=6, backend="grid"))
    assert sol.graph.is_connected()
    assert sol.trace.metadata["backend"] == "grid"
