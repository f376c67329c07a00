"""Command-line front end: ``solve``, ``sharpness``, ``bench`` and ``compare``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import io
from .baselines import baseline_report
from .bench import SLOPE_BAND, run_bench, sharpness_run, uniform_cloud
from .flatness import FlatnessParams, GridInfeasibleError
from .geometry import PointCloud
from .pipeline import InvariantViolation, solve


@dataclass
class RunConfig:
    input: str | None
    generate: str | None
    c0: float
    grid_l: int | None
    backend: str
    threshold: float
    mode: str
    seed: int
    output: str | None
    svg: bool

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(getattr(args, "input", None), getattr(args, "generate", None), args.c0,
                   args.grid_l, args.backend, args.threshold, args.mode, args.seed,
                   getattr(args, "output", None), getattr(args, "svg", False))

    def params(self) -> FlatnessParams:
        return FlatnessParams(c0=self.c0, grid_l=self.grid_l, backend=self.backend,
                              flat_threshold=self.threshold)

    def load_points(self):
        if self.input:
            return io.read_points(self.input)
        if self.generate:
            parts = self.generate.split(":")
            if parts[0] != "uniform" or len(parts) not in (2, 3):
                raise ValueError("generator spec must look like uniform:N or uniform:N:DIM")
            dim = int(parts[2]) if len(parts) == 3 else 2
            return uniform_cloud(int(parts[1]), dim, self.seed)
        raise ValueError("give --input FILE or --generate uniform:N[:DIM]")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c0", type=float, default=300.0, help="neighborhood constant (default 300)")
    p.add_argument("--grid-l", type=int, default=None, help="grid resolution L for --backend grid")
    p.add_argument("--backend", choices=("width", "grid"), default="width")
    p.add_argument("--threshold", type=float, default=0.0625, help="flatness threshold")
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atsp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a point file and write tour and metrics")
    p.add_argument("--input")
    p.add_argument("--generate", help="uniform:N[:DIM] instead of --input")
    p.add_argument("--output", required=True, help="directory for tour.txt and metrics.json")
    p.add_argument("--svg", action="store_true", help="also write tour.svg (planar input)")
    _common(p)

    p = sub.add_parser("sharpness", help="dyadic family: net-refinement work vs n^3/32")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--output", help="write the report as JSON here")
    _common(p)

    p = sub.add_parser("bench", help="meter sweep and log-log slope fit")
    p.add_argument("--sizes", type=int, nargs="+", required=True)
    p.add_argument("--family", choices=("sharpness", "uniform-random"), default="sharpness")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--output", help="write records as JSON here")
    _common(p)

    p = sub.add_parser("compare", help="tour lengths against MST, nearest insertion, optimum")
    p.add_argument("--input")
    p.add_argument("--generate", help="uniform:N[:DIM] instead of --input")
    _common(p)
    return parser


def cmd_solve(cfg: RunConfig) -> int:
    cloud = PointCloud.from_points(cfg.load_points())
    if cloud.dropped:
        print(f"warning: dropped {cloud.dropped} duplicate point(s)", file=sys.stderr)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    try:
        sol = solve(cloud, cfg.params(), mode=cfg.mode)
    except InvariantViolation as exc:
        (out / "failure.json").write_text(io.format_metrics(exc.trace.to_dict()))
        print(f"error: {exc}", file=sys.stderr)
        return 2
    (out / "tour.txt").write_text(io.format_tour(sol.tour.sequence))
    (out / "metrics.json").write_text(io.format_metrics(sol.to_metrics()))
    if cfg.svg:
        if cloud.dim == 2:
            (out / "tour.svg").write_text(io.tour_svg(cloud.points, sol.tour.sequence))
        else:
            print("warning: SVG output skipped for non-planar input", file=sys.stderr)
    ratio = sol.ratio
    print(f"n={cloud.n} tour_length={sol.tour_length:.6g} mst={sol.mst_length:.6g} "
          f"ratio={'n/a' if ratio is None else f'{ratio:.4f}'}")
    print("wall seconds: " + ", ".join(f"{k}={v:.3f}" for k, v in sol.trace.wall.items()))
    return 0


def cmd_sharpness(args, cfg: RunConfig) -> int:
    report = sharpness_run(args.n, cfg.params())
    text = io.format_metrics(report)
    if args.output:
        Path(args.output).write_text(text)
    sys.stdout.write(text)
    return 0 if report["meets_bound"] else 1


def cmd_bench(args, cfg: RunConfig) -> int:
    result = run_bench(args.sizes, args.family, cfg.seed, args.dim, cfg.params())
    print(f"{'n':>6} {'net-refinement':>15} {'total':>12} {'levels':>7}")
    for r in result.records:
        print(f"{r.n:>6} {r.meter['net-refinement']:>15} {r.meter['total']:>12} {r.levels:>7}")
    print(f"slope(net-refinement)={result.slope:.4f} slope(total)={result.slope_total:.4f}")
    if args.output:
        payload = {
            "family": result.family,
            "slope": result.slope,
            "slope_total": result.slope_total,
            "records": [{"n": r.n, "meter": r.meter, "levels": r.levels} for r in result.records],
        }
        Path(args.output).write_text(io.format_metrics(payload))
    if result.within_band is False:
        print(f"error: slope outside {SLOPE_BAND}", file=sys.stderr)
        return 1
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    cloud = PointCloud.from_points(cfg.load_points())
    sol = solve(cloud, cfg.params(), mode=cfg.mode)
    rep = baseline_report(cloud, sol.tour_length)
    rows = [("atsp", rep.atsp_tour_length), ("nearest-insertion", rep.nearest_insertion_length),
            ("mst", rep.mst_length), ("optimal", rep.optimal_cycle_length)]
    print(f"{'method':<18} {'length':>14}")
    for name, value in rows:
        print(f"{name:<18} {'-' if value is None else f'{value:.6f}':>14}")
    for name, value in rep.ratios.items():
        print(f"{name:<30} {'-' if value is None else f'{value:.4f}'}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig.from_args(args)
    try:
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "sharpness":
            return cmd_sharpness(args, cfg)
        if args.command == "bench":
            return cmd_bench(args, cfg)
        return cmd_compare(cfg)
    except (ValueError, GridInfeasibleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.trace.to_dict()["deviations"]), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
