"""Flatness numbers from the two backends on a thin strip and on a cross."""
import warnings

import numpy as np

from atsp import FlatnessParams, alpha_grid, alpha_width, orient

rng = np.random.default_rng(1)
v = np.zeros(2)

## A thin strip: points within 0.03 of a tilted line through v
t = rng.uniform(-1.5, 1.5, 12)
direction = np.array([np.cos(0.4), np.sin(0.4)])
normal = np.array([-direction[1], direction[0]])
strip = np.vstack([v, t[:, None] * direction + rng.uniform(-0.03, 0.03, (12, 1)) * normal])

## A cross: two perpendicular segments through v
arm = np.linspace(-1, 1, 7)
cross = np.vstack([np.stack([arm, 0 * arm], 1), np.stack([0 * arm, arm], 1)])

# the grid backend at c0 = 2 needs L = 80; the default c0 = 300 would need L = 12000
params = FlatnessParams(c0=2, grid_l=80, backend="grid")
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    for name, b in (("strip", strip), ("cross", cross)):
        w = alpha_width(v, b, 1.0)
        g = alpha_grid(v, b, 1.0, params)
        flat = "flat" if w.alpha <= 1 / 16 else "not flat"
        print(f"{name:5s}: width {w.alpha:.4f}  grid {g.alpha:.4f}  -> {flat}")

## Points sorted along the strip's line, as the solver orders them
frame = orient(alpha_width(v, strip, 1.0).line, v)
order = np.argsort(frame.first(strip))
print("order along the line:", order.tolist())
