"""Refining epsilon-neighbourhood covers of a growing family of compacts.

The compacts are K_n = B[0; M] intersected with the span of the first n
coordinate axes.  For each n the sweep builds nets of K_n at radii
r_k = r / 2**(k-1), keeps the centres with D(c) <= 2 r_k, and records a
sequence point per level.  An empty survivor set at level k fixes
mu_n = k - 1, rewinds the sequence to index n and moves on to K_{n+1}.
The sweep never finishes on its own; it stops on the step budget.

Nets are lattices eps * n**(-1/p) * Z^n restricted to K_n, with out-of-ball
lattice points pulled onto the sphere of radius M.  Past the first level only
lattice points within r_{k-1}/2 of a previous survivor are examined: any
level-k survivor has such a neighbour in the previous net, and that
neighbour's defect is at most 2 r_{k-1}, so nothing is lost.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractError
from .problem import BALL_TEST_SLACK, SrpInstance
from .space import LpSpace, as_point, distances, norms

log = logging.getLogger(__name__)

__all__ = [
    "Compact",
    "CompactFamily",
    "NetCover",
    "SequenceState",
    "StepRecord",
    "Stop",
    "coordinate_balls",
    "build_net",
    "survivors",
    "run_sequence",
]


@dataclass(frozen=True)
class Compact:
    """B[0; radius] restricted to the first ``active`` coordinates of ``space``."""

    space: LpSpace
    active: int
    radius: float

    def __post_init__(self):
        if not 1 <= self.active <= self.space.dim:
            raise ContractError(f"active coordinate count must be in 1..{self.space.dim}")
        if not self.radius > 0:
            raise ContractError("radius must be positive")

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = as_point(self.space, x)
        return bool(np.all(x[self.active :] == 0.0) and norms(self.space, x) <= self.radius * (1 + tol))

    def distance_to(self, x) -> float:
        """l_p distance from x to this compact (nearest point is x truncated, then pulled into the ball)."""
        x = as_point(self.space, x)
        head = x.copy()
        head[self.active :] = 0.0
        h = float(norms(self.space, head))
        if h > self.radius:
            head *= self.radius / h
        return float(norms(self.space, x - head))


@dataclass(frozen=True)
class CompactFamily:
    members: tuple[Compact, ...]
    diam_bound: float

    def __post_init__(self):
        if not self.members:
            raise ContractError("family needs at least one compact")
        if not self.diam_bound > 0:
            raise ContractError("diameter bound must be positive")
        object.__setattr__(self, "members", tuple(self.members))


def coordinate_balls(space: LpSpace, radius: float, actives=None) -> CompactFamily:
    """K_n = B[0; M] on the first n axes, for n in ``actives`` (default 1..dim); r = 2M."""
    actives = range(1, space.dim + 1) if actives is None else actives
    return CompactFamily(tuple(Compact(space, n, radius) for n in actives), 2.0 * radius)


@dataclass(frozen=True, eq=False)
class NetCover:
    """Centres in K whose balls of radius ``radius`` cover the radius/2-neighbourhood of K."""

    level: int
    radius: float
    centers: np.ndarray


def _lattice_step(K: Compact, eps: float) -> float:
    return eps * K.active ** (-1.0 / K.space.p)


def _lattice_points(K: Compact, g: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Net centres from lattice cells of step g, over the index box [lo, hi] in active coordinates."""
    space = K.space
    n = K.active
    axes = [np.arange(a, b + 1.0) * g for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    full = np.zeros((len(grid), space.dim))
    full[:, :n] = grid
    nearest = full.copy()
    nearest[:, :n] = np.clip(0.0, grid - g / 2.0, grid + g / 2.0)
    full = full[norms(space, nearest) <= K.radius]
    d = norms(space, full)
    out = d > K.radius
    if np.any(out):
        full[out] *= (K.radius / d[out])[:, None]
        over = norms(space, full) > K.radius
        full[over] *= 1.0 - 2.0**-50
    return full


def build_net(K: Compact, eps: float, level: int = 0) -> NetCover:
    """An eps-net of K made of points of K; its balls of radius 2 eps cover the eps-neighbourhood."""
    if not eps > 0:
        raise ContractError("eps must be positive")
    if eps >= K.radius:
        centers = K.space.zero[None, :]
    else:
        g = _lattice_step(K, eps)
        reach = K.radius / g + 0.5
        idx = np.arange(np.ceil(-reach), np.floor(reach) + 1.0)
        centers = _lattice_points(K, g, np.full(K.active, idx[0]), np.full(K.active, idx[-1]))
        centers = centers[np.lexsort(centers.T[::-1])]
    return NetCover(level, 2.0 * eps, centers)


def _refined_net(K: Compact, previous: np.ndarray, prev_radius: float, level: int, radius: float) -> NetCover:
    """The part of the radius-``radius`` net lying within prev_radius/2 of ``previous``."""
    eps = radius / 2.0
    if eps >= K.radius:
        return build_net(K, eps, level)
    g = _lattice_step(K, eps)
    n = K.active
    reach = prev_radius / 2.0 + eps / 2.0
    pieces = []
    for c in previous:
        head = c[:n]
        lo = np.ceil((head - reach) / g - 0.5)
        hi = np.floor((head + reach) / g + 0.5)
        pts = _lattice_points(K, g, lo, hi)
        pieces.append(pts[distances(K.space, pts, c) <= prev_radius / 2.0])
    pts = np.concatenate(pieces) if pieces else np.empty((0, K.space.dim))
    if len(pts) > 1:
        pts = np.unique(pts, axis=0)
    return NetCover(level, radius, pts)


def survivors(inst: SrpInstance, net: NetCover) -> NetCover:
    if len(net.centers) == 0:
        return net
    keep = inst.defect_many(net.centers) <= 2.0 * net.radius + BALL_TEST_SLACK
    return NetCover(net.level, net.radius, net.centers[keep])


class Stop(str, enum.Enum):
    BUDGET = "budget"
    FAMILY_EXHAUSTED = "family_exhausted"
    RESOLUTION_LIMIT = "resolution_limit"
    NET_OVERFLOW = "net_overflow"


@dataclass(frozen=True)
class StepRecord:
    n: int
    k: int
    survivors: int
    center: tuple[float, ...] | None


@dataclass
class SequenceState:
    """Progress of the (n, k) sweep.

    ``mu`` maps each finalised n to its mu_n; the current n is still open.
    ``nu`` is the n whose sweep is running when the budget ran out, if no
    later compact exists to move to (the loop would then stay there forever).
    """

    n: int = 1
    k: int = 0
    mu: dict[int, int] = field(default_factory=dict)
    xs: list[np.ndarray] = field(default_factory=list)
    changes: list[int] = field(default_factory=list)
    radius: float = float("nan")
    steps: int = 0
    stop: Stop | None = None
    trace: list[StepRecord] = field(default_factory=list)

    @property
    def current(self) -> np.ndarray | None:
        return self.xs[-1] if self.xs else None

    @property
    def nu(self) -> int | None:
        return self.n if self.stop is Stop.BUDGET else None

    def _set(self, index: int, x: np.ndarray):
        # index is 1-based, as in x_1, x_2, ...
        while len(self.changes) < index:
            self.changes.append(0)
        if len(self.xs) >= index:
            if np.array_equal(self.xs[index - 1], x):
                return
            self.xs[index - 1] = x
        else:
            self.xs.append(x)
        self.changes[index - 1] += 1

    def _truncate(self, length: int):
        for j in range(length, len(self.xs)):
            self.changes[j] += 1
        del self.xs[length:]


def run_sequence(
    inst: SrpInstance,
    fam: CompactFamily,
    budget: int,
    sink: Callable[[StepRecord], None] | None = None,
    min_radius: float | None = None,
    max_net: int = 2_000_000,
) -> SequenceState:
    """Run the (n, k) sweep for at most ``budget`` steps; one step is one (n, k) net.

    Besides the budget, the sweep stops when the compacts run out, when the
    level radius reaches ``min_radius`` (default 1e-12 * r, where lattice
    arithmetic stops resolving the grid) or when a net exceeds ``max_net``
    centres.
    """
    if budget < 1:
        raise ContractError("budget must be at least one step")
    r = fam.diam_bound
    floor = r * 1e-12 if min_radius is None else min_radius
    state = SequenceState()
    members = fam.members
    prev: NetCover | None = None
    while True:
        if state.steps >= budget:
            state.stop = Stop.BUDGET
            return state
        K = members[state.n - 1]
        k = state.k + 1
        radius = r / 2.0 ** (k - 1)
        if radius < floor:
            state.stop = Stop.RESOLUTION_LIMIT
            return state
        if prev is None:
            net = build_net(K, radius / 2.0, k)
        else:
            net = _refined_net(K, prev.centers, prev.radius, k, radius)
        if len(net.centers) > max_net:
            state.stop = Stop.NET_OVERFLOW
            return state
        alive = survivors(inst, net)
        state.steps += 1
        state.radius = radius
        rec_center = None
        if len(alive.centers):
            order = np.lexsort(alive.centers.T[::-1])
            alive = NetCover(k, radius, alive.centers[order])
            pick = alive.centers[0].copy()
            state._set(state.n - 1 + k, pick)
            state.k = k
            rec_center = tuple(float(v) for v in pick)
            prev = alive
        rec = StepRecord(state.n, k, len(alive.centers), rec_center)
        state.trace.append(rec)
        if sink is not None:
            sink(rec)
        if len(alive.centers):
            continue
        mu = k - 1
        if mu < 1:
            raise ContractError("the first net was rejected; the diameter bound does not cover the source")
        state.mu[state.n] = mu
        log.debug("mu_%d = %d", state.n, mu)
        state._set(state.n, state.xs[state.n - 1 + mu - 1].copy())
        state._truncate(state.n)
        if state.n == len(members):
            state.stop = Stop.FAMILY_EXHAUSTED
            return state
        state.n += 1
        state.k = 0
        prev = None
