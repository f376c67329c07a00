"""Multiscale net/flatness solver for finite Euclidean traveling salesman tours."""
from .baselines import (
    BaselineReport,
    baseline_report,
    mst_length,
    nearest_insertion_tour,
    optimal_cycle_length,
)
from .flatness import (
    FlatnessParams,
    FlatnessResult,
    GridInfeasibleError,
    OrientedFrame,
    alpha_grid,
    alpha_width,
    flat_pairs,
    neighborhood,
    orient,
)
from .geometry import (
    DistanceMeter,
    Line,
    PointCloud,
    ball_query,
    dist_point_to_line,
    distance,
    hausdorff_distance,
    is_maximal_net,
)
from .graph import ScaleGraph, TwoToOneTour, components, tour_length, two_to_one_tour
from .nets import NetLadder, NetLevel, build_ladder, refine_net
from .pipeline import InvariantViolation, RunTrace, Solution, StepState, solve

__version__ = "0.1.0"
