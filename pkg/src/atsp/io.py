"""Point files, tour and metrics files, and SVG rendering of planar tours.

Point files hold one point per line as whitespace-separated decimals; the
dimension is taken from the first data line and ``#`` starts a comment line.
Metrics are written as JSON with a fixed key order so that identical runs
give identical bytes; wall-clock timings are never written there.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


class PointFileError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


def parse_points(text: str, source: str = "<input>") -> np.ndarray:
    rows = []
    dim = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise PointFileError(source, lineno, f"not a number in {line!r}") from None
        if not all(math.isfinite(x) for x in row):
            raise PointFileError(source, lineno, "coordinates must be finite")
        if dim is None:
            dim = len(row)
        elif len(row) != dim:
            raise PointFileError(source, lineno,
                                 f"expected {dim} coordinates, found {len(row)}")
        rows.append(row)
    if not rows:
        raise PointFileError(source, 0, "no points found")
    return np.array(rows, dtype=np.float64)


def read_points(path) -> np.ndarray:
    path = Path(path)
    return parse_points(path.read_text(), str(path))


def format_points(points: np.ndarray) -> str:
    return "".join(" ".join(repr(float(x)) for x in row) + "\n" for row in np.atleast_2d(points))


def write_points(path, points: np.ndarray) -> None:
    Path(path).write_text(format_points(points))


def format_tour(sequence) -> str:
    return "".join(f"{int(i)}\n" for i in sequence)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def format_metrics(metrics: dict) -> str:
    return json.dumps(_clean(metrics), indent=2) + "\n"


def load_metrics(path) -> dict:
    return json.loads(Path(path).read_text())


def tour_svg(points: np.ndarray, sequence, size: int = 600, margin: int = 20) -> str:
    """SVG with the points as dots and the tour as a polyline (planar input only)."""
    points = np.asarray(points, dtype=np.float64)
    if points.shape[1] != 2:
        raise ValueError("SVG output needs planar points")
    lo = points.min(axis=0)
    span = float((points.max(axis=0) - lo).max()) or 1.0
    scale = (size - 2 * margin) / span

    def xy(p):
        # flip y so the picture has the usual orientation
        return margin + (p[0] - lo[0]) * scale, size - margin - (p[1] - lo[1]) * scale

    path = " ".join("{:.3f},{:.3f}".format(*xy(points[i])) for i in sequence)
    dots = "\n".join('  <circle cx="{:.3f}" cy="{:.3f}" r="2.5" />'.format(*xy(p))
                     for p in points)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">\n'
        f'  <polyline fill="none" stroke="steelblue" stroke-width="1" points="{path}" />\n'
        f'  <g fill="black">\n{dots}\n  </g>\n'
        "</svg>\n"
    )
