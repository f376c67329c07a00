"""Walk the dyadic net ladder of a small planar cloud."""
import numpy as np

from atsp import PointCloud, build_ladder, hausdorff_distance, is_maximal_net
from atsp.nets import dyadic_scale

rng = np.random.default_rng(0)
cloud = PointCloud.from_points(rng.random((60, 2)))
print(f"{cloud.n} points, r0 = {cloud.r0:.3f}")

## Each level is a maximal net at scale r0 * 2**-exponent
ladder = build_ladder(cloud)
for i, level in enumerate(ladder):
    scale = ladder.scale(i)
    ok = is_maximal_net(cloud.points[list(level.net)], cloud.points, scale)
    print(f"level {i + 1}: exponent {level.exponent:2d}  scale {scale:.4f}  "
          f"net {len(level.net):3d}  maximal={ok}")

## Consecutive nets are close in Hausdorff distance, within one dyadic step
for a, b in zip(ladder, list(ladder)[1:]):
    s = dyadic_scale(cloud.r0, b.exponent)
    dh = hausdorff_distance(cloud.points[list(a.net)], cloud.points[list(b.net)])
    print(f"{len(a.net):3d} -> {len(b.net):3d}: {s:.4f} <= {dh:.4f} < {2 * s:.4f}")
