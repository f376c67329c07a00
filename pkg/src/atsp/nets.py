"""Greedy maximal-net refinement between dyadic scales and the net ladder."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DistanceMeter, PointCloud, null_meter, pairwise_distances


@dataclass(frozen=True)
class NetLevel:
    """One rung of the ladder: a net at scale ``r0 * 2**-exponent``.

    ``net`` keeps admission order (the first entry is the seed point);
    ``residual`` is ascending.
    """

    exponent: int
    net: tuple
    residual: tuple

    @property
    def complete(self) -> bool:
        return not self.residual

    def __len__(self) -> int:
        return len(self.net)


@dataclass(frozen=True)
class NetLadder:
    levels: tuple
    r0: float

    def scale(self, i: int) -> float:
        return dyadic_scale(self.r0, self.levels[i].exponent)

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def __getitem__(self, i):
        return self.levels[i]


def dyadic_scale(r0: float, exponent: int) -> float:
    # exact for powers of two, so thresholds compare bit-for-bit across modules
    return float(r0 * 2.0 ** (-exponent))


def initial_level(cloud: PointCloud) -> NetLevel:
    return NetLevel(1, (0,), tuple(range(1, cloud.n)))


def refine_net(cloud: PointCloud, x: NetLevel, eps: float,
               meter: DistanceMeter | None = None, validate: bool = False):
    """Refine the ``eps``-net ``x`` to the next dyadic scale that adds points.

    Returns ``(k, x_new)`` where ``x_new`` is a maximal ``eps * 2**-k``-net of
    the cloud built by scanning the residual in ascending index order. The
    exponent of ``x_new`` is ``x.exponent + k``.

    Raises ``ValueError`` if the residual is empty, ``eps`` is not positive,
    or ``x`` is not a maximal ``eps``-net.
    """
    meter = meter if meter is not None else null_meter()
    if not x.residual:
        raise ValueError("net is already complete (empty residual)")
    if eps <= 0:
        raise ValueError("eps must be positive")
    pts = cloud.points
    net = list(x.net)
    residual = list(x.residual)
    if validate and len(net) > 1:
        sep = pairwise_distances(pts[net], pts[net])
        np.fill_diagonal(sep, np.inf)
        if sep.min() < eps:
            raise ValueError("x is not eps-separated")

    meter.add(len(net) * len(residual))
    gaps = pairwise_distances(pts[residual], pts[net]).min(axis=1)
    d = float(gaps.max())
    if d >= eps:
        raise ValueError("x is not a maximal eps-net: some residual point is eps-far")

    k = 1
    while eps * 2.0 ** (-k) > d:
        k += 1
    threshold = eps * 2.0 ** (-k)

    # greedy scan: admit a residual point iff it is threshold-far from the
    # current net. Point j is charged one evaluation per net member present
    # when it is reached; gaps to the old net are reused and only distances
    # to newly admitted points are computed.
    residual_arr = np.asarray(residual, dtype=np.intp)
    dmin = gaps.copy()
    new_residual = []
    size = len(net)
    for j, i in enumerate(residual):
        meter.add(size)
        if dmin[j] >= threshold:
            net.append(i)
            size += 1
            rest = residual_arr[j + 1:]
            if rest.size:
                np.minimum(dmin[j + 1:], pairwise_distances(pts[rest], pts[i:i + 1])[:, 0],
                           out=dmin[j + 1:])
        else:
            new_residual.append(i)
    return k, NetLevel(x.exponent + k, tuple(net), tuple(new_residual))


def build_ladder(cloud: PointCloud, meter: DistanceMeter | None = None) -> NetLadder:
    meter = meter if meter is not None else null_meter()
    if cloud.n == 0:
        raise ValueError("cannot build a ladder on an empty cloud")
    levels = [initial_level(cloud)]
    if cloud.r0 == 0:
        return NetLadder(tuple(levels), cloud.r0)
    while levels[-1].residual:
        last = levels[-1]
        _, nxt = refine_net(cloud, last, dyadic_scale(cloud.r0, last.exponent), meter)
        levels.append(nxt)
    return NetLadder(tuple(levels), cloud.r0)
