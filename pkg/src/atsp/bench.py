"""Instance generators and the meter-based complexity harness."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .flatness import FlatnessParams
from .geometry import DistanceMeter, PointCloud
from .pipeline import solve

SLOPE_BAND = (2.8, 3.2)


def sharpness_family(n: int) -> np.ndarray:
    """``0, 1, 1/2, ..., 2**(2-n)`` as an (n, 1) array, zero first."""
    if n < 2:
        raise ValueError("the dyadic family needs at least two points")
    values = [0.0] + [2.0 ** -i for i in range(n - 1)]
    return np.array(values, dtype=np.float64).reshape(-1, 1)


def uniform_cloud(n: int, dim: int = 2, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).random((n, dim))


def cubic_lower_bound(n: int) -> float:
    return n ** 3 / 32


def fit_loglog_slope(sizes, counts) -> float:
    """Least-squares slope of ``log(count)`` against ``log(size)``."""
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(counts, dtype=np.float64))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


@dataclass
class BenchRecord:
    n: int
    meter: dict
    wall: dict
    levels: int


@dataclass
class BenchResult:
    family: str
    records: list = field(default_factory=list)
    slope: float | None = None
    slope_total: float | None = None

    @property
    def within_band(self) -> bool | None:
        if self.family != "sharpness" or self.slope is None:
            return None
        return SLOPE_BAND[0] <= self.slope <= SLOPE_BAND[1]


def sharpness_run(n: int, params: FlatnessParams | None = None) -> dict:
    if n < 8 or n % 4:
        raise ValueError("sharpness runs need n >= 8 and n divisible by 4")
    cloud = PointCloud.from_points(sharpness_family(n))
    meter = DistanceMeter()
    sol = solve(cloud, params, meter=meter)
    count = meter.by_phase["net-refinement"]
    bound = cubic_lower_bound(n)
    return {
        "n": n,
        "net_refinement_pairs": count,
        "lower_bound": bound,
        "meets_bound": count >= bound,
        "refinement_steps": len(sol.trace.steps),
        "meter": meter.snapshot(),
        "tour_length": sol.tour_length,
        "mst_length": sol.mst_length,
    }


def run_bench(sizes, family: str = "sharpness", seed: int = 0, dim: int = 2,
              params: FlatnessParams | None = None) -> BenchResult:
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise ValueError("a slope fit needs at least three sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    if family not in ("sharpness", "uniform-random"):
        raise ValueError(f"unknown family {family!r}")
    result = BenchResult(family)
    for n in sizes:
        pts = sharpness_family(n) if family == "sharpness" else uniform_cloud(n, dim, seed + n)
        meter = DistanceMeter()
        sol = solve(PointCloud.from_points(pts), params, meter=meter)
        result.records.append(BenchRecord(n, meter.snapshot(), dict(sol.trace.wall),
                                          len(sol.trace.steps) + 1))
    result.slope = fit_loglog_slope(sizes, [r.meter["net-refinement"] for r in result.records])
    result.slope_total = fit_loglog_slope(sizes, [r.meter["total"] for r in result.records])
    return result
