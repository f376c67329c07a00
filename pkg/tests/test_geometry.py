import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atsp.geometry import (
    DistanceMeter,
    Line,
    PointCloud,
    ball_query,
    dist_point_to_line,
    distance,
    hausdorff_distance,
    is_maximal_net,
)
from oracles import hausdorff_loops


def test_distance_examples_and_meter():
    m = DistanceMeter()
    assert distance([0, 0], [0, 0], m) == 0
    assert distance([0, 0], [3, 4], m) == 5
    assert distance([1], [0.4], m) == pytest.approx(0.6)
    assert m.pair_evaluations == 3


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        distance([0, 0], [1, 2, 3])


def test_meter_phases_merge():
    m = DistanceMeter()
    with m.phase("flatness"):
        m.add(4)
    m.add(1)
    other = DistanceMeter()
    with other.phase("tour"):
        other.add(2)
    m.merge(other)
    snap = m.snapshot()
    assert snap["total"] == 7
    assert snap["flatness"] == 4 and snap["tour"] == 2


def test_point_to_line():
    x_axis = Line(np.zeros(2), np.array([1.0, 0.0]))
    assert dist_point_to_line([5, 0], x_axis) == 0
    assert dist_point_to_line([0, 1], x_axis) == 1
    assert dist_point_to_line([2, 2], x_axis) == 2
    tilted = Line(np.zeros(2), np.array([3.0, 4.0]))
    assert np.linalg.norm(tilted.direction) == pytest.approx(1, abs=1e-12)


def test_hausdorff_examples():
    assert hausdorff_distance([[0.0], [3.0]], [[0.0], [3.0]]) == 0
    assert hausdorff_distance([[0.0]], [[0.0], [3.0]]) == 3
    assert hausdorff_distance([[0.0, 0.0]], [[3.0, 4.0]]) == 5
    with pytest.raises(ValueError):
        hausdorff_distance(np.zeros((0, 2)), [[1.0, 1.0]])


def test_hausdorff_matches_double_loop():
    rng = np.random.default_rng(3)
    for _ in range(50):
        dim = int(rng.integers(1, 4))
        a = rng.normal(size=(int(rng.integers(1, 12)), dim))
        b = rng.normal(size=(int(rng.integers(1, 12)), dim))
        assert hausdorff_distance(a, b) == hausdorff_loops(a, b)


coords = st.floats(-10, 10, allow_nan=False, width=32)
sets = st.lists(st.tuples(coords, coords), min_size=1, max_size=8)


@settings(max_examples=60, deadline=None)
@given(sets, sets, sets)
def test_hausdorff_metric_properties(a, b, c):
    a, b, c = (np.array(s, dtype=float) for s in (a, b, c))
    dab = hausdorff_distance(a, b)
    assert dab == hausdorff_distance(b, a)
    assert hausdorff_distance(a, a) == 0
    assert hausdorff_distance(a, c) <= dab + hausdorff_distance(b, c) + 1e-9


def test_ball_query_examples():
    pts = np.array([[0.0], [0.4], [1.0]])
    assert ball_query(pts, [0.0], 0.0).size == 0
    assert ball_query(pts, [0.0], 0.0, closed=True).tolist() == [0]
    assert ball_query(pts, [0.0], 0.5).tolist() == [0, 1]
    assert ball_query(pts, [0.0], 1.0).tolist() == [0, 1]
    assert ball_query(pts, [0.0], 1.0, closed=True).tolist() == [0, 1, 2]


def test_ball_query_matches_scan():
    rng = np.random.default_rng(5)
    pts = rng.random((40, 2))
    for closed in (False, True):
        for _ in range(20):
            c, r = rng.random(2), float(rng.random())
            expect = [i for i, p in enumerate(pts)
                      if (np.linalg.norm(p - c) <= r if closed else np.linalg.norm(p - c) < r)]
            assert ball_query(pts, c, r, closed=closed).tolist() == expect


def test_is_maximal_net_examples():
    assert is_maximal_net([[0.0], [1.0]], [[0.0], [1.0]], 1.0)
    assert not is_maximal_net([[0.0]], [[0.0], [1.0]], 1.0)
    assert is_maximal_net([[0.0], [1.0]], [[0.0], [0.4], [1.0]], 1.0)
    with pytest.raises(ValueError):
        is_maximal_net([[2.0]], [[0.0], [1.0]], 1.0)


def test_cloud_dedup_and_radius():
    cloud = PointCloud.from_points([[1.0, 0.0], [0.0, -2.0], [1.0, 0.0], [-0.0, -2.0]])
    assert cloud.n == 2 and cloud.dropped == 2
    assert cloud.r0 == 10.0
    assert PointCloud.from_points([[0.0, 0.0]]).r0 == 0.0
