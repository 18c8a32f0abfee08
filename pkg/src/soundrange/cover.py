"""Covershapes, coverands and their half-size subdivision.

A coverand C[x; r] is a set holding its anchor x and contained in the closed
ball B[x; r].  Two shapes are provided:

``BallShape``
    closed l_p balls in R^m.  Children come from the lattice g*Z^m with
    g = (r/2)/m**(1/p); a lattice point is kept when its l_inf cell meets the
    parent ball, and kept points outside the ball are pulled radially onto its
    surface.  Every parent point is within r/4 of its cell's lattice point and
    the pull moves a point by at most another r/4, so the children of size
    r/2 cover the parent.  Because the lattice is global, children of
    overlapping parents coincide bit for bit and can be merged, and a pulled
    point is redundant once its cell's lattice point is a child elsewhere.

``RayShape``
    closed segments {origin + (1+u)*b : u in [u0 - r, u0 + r]} of a ray with
    unit direction b.  A segment splits into its two halves.

The RC loop works on whole families at once, so the shapes operate on
stacked anchors; ``subdivide`` is the one-coverand convenience wrapper.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .space import LpSpace, as_point, distances, norms

__all__ = [
    "ShapeKind",
    "BallShape",
    "RayShape",
    "Coverand",
    "CoverFamily",
    "ball",
    "ray_segment",
    "subdivide",
    "contains",
    "family_spread",
    "max_ball_children",
]

RAY_TRANSVERSE_TOL = 1e-9


class ShapeKind(str, enum.Enum):
    LP_BALL = "lp_ball"
    RAY_SEGMENT = "ray_segment"


def max_ball_children(space: LpSpace) -> int:
    return (math.ceil(4 * space.box_factor()) + 1) ** space.dim


@dataclass(frozen=True, eq=False)
class BallShape:
    space: LpSpace
    kind = ShapeKind.LP_BALL

    def children(self, anchors: np.ndarray, offsets, size: float, merge_cells: bool = False):
        """Half-size children of every ball B[anchor; size].

        Returns ``(child_anchors, None, parent_index)`` in parent order, each
        parent's children sorted lexicographically.  With ``merge_cells`` a
        pulled child is dropped when its cell's lattice point is an unpulled
        child of some other parent: that lattice child already covers the
        whole cell.
        """
        if not size > 0:
            raise ContractError("coverand size must be positive")
        space = self.space
        m = space.dim
        g = (size / 2.0) / space.box_factor()
        out, owners, cells, pulled = [], [], [], []
        for idx, a in enumerate(np.asarray(anchors, dtype=np.float64).reshape(-1, m)):
            lo = np.ceil((a - size) / g - 0.5)
            hi = np.floor((a + size) / g + 0.5)
            axes = [np.arange(l, h + 1.0) for l, h in zip(lo, hi)]
            ij = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
            grid = ij * g
            nearest = np.clip(a, grid - g / 2.0, grid + g / 2.0)
            meets = distances(space, nearest, a) <= size
            ij, grid = ij[meets], grid[meets]
            outside = distances(space, grid, a) > size
            grid = _pull_into_ball(space, grid, a, size)
            order = np.lexsort(grid.T[::-1]) if len(grid) > 1 else slice(None)
            out.append(grid[order])
            cells.append(ij[order])
            pulled.append(outside[order])
            owners.append(np.full(len(grid), idx))
        if not out:
            return np.empty((0, m)), None, np.empty(0, dtype=int)
        out, owners = np.concatenate(out), np.concatenate(owners)
        if merge_cells:
            cells, pulled = np.concatenate(cells), np.concatenate(pulled)
            keys = np.ascontiguousarray(cells.astype(np.int64)).view(np.dtype((np.void, 8 * m))).ravel()
            covered = np.isin(keys, np.unique(keys[~pulled]))
            keep = ~(pulled & covered)
            out, owners = out[keep], owners[keep]
        return out, None, owners

    def contains(self, anchor: np.ndarray, offset, size: float, x: np.ndarray) -> bool:
        return bool(distances(self.space, x, anchor) <= size)

    def anchor_of(self, offset):
        raise TypeError("ball coverands are located by anchor only")


def _pull_into_ball(space: LpSpace, pts: np.ndarray, centre: np.ndarray, radius: float) -> np.ndarray:
    d = distances(space, pts, centre)
    outside = d > radius
    if not np.any(outside):
        return pts
    pts = pts.copy()
    scale = radius / d[outside]
    moved = centre + (pts[outside] - centre) * scale[:, None]
    # rounding can leave the pulled point a hair outside; shrink until it is not
    for _ in range(8):
        over = distances(space, moved, centre) > radius
        if not np.any(over):
            break
        scale[over] *= 1.0 - 2.0**-50
        moved[over] = centre + (pts[outside][over] - centre) * scale[over][:, None]
    pts[outside] = moved
    return pts


@dataclass(frozen=True, eq=False)
class RayShape:
    """Segments of the ray {origin + d*direction : d >= 1}, parameterised by u = d - 1."""

    space: LpSpace
    origin: np.ndarray
    direction: np.ndarray
    kind = ShapeKind.RAY_SEGMENT

    def __post_init__(self):
        origin = as_point(self.space, self.origin)
        direction = as_point(self.space, self.direction)
        if abs(float(norms(self.space, direction)) - 1.0) > 1e-9:
            raise ContractError("ray direction must have unit norm")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction)

    def anchor_of(self, offsets):
        offsets = np.asarray(offsets, dtype=np.float64)
        return self.origin + (1.0 + offsets)[..., None] * self.direction

    def children(self, anchors, offsets, size: float, merge_cells: bool = False):
        if not size > 0:
            raise ContractError("coverand size must be positive")
        offsets = np.asarray(offsets, dtype=np.float64).reshape(-1)
        half = size / 2.0
        child = np.stack([offsets - half, offsets + half], axis=1).reshape(-1)
        owners = np.repeat(np.arange(len(offsets)), 2)
        return self.anchor_of(child), child, owners

    def parameter(self, x: np.ndarray) -> tuple[float, float]:
        """Least-squares ray parameter u of x and the transverse l_p residual."""
        x = as_point(self.space, x)
        rel = x - self.origin
        b = self.direction
        u = float(rel @ b / (b @ b)) - 1.0
        resid = float(norms(self.space, rel - (1.0 + u) * b))
        return u, resid

    def contains(self, anchor, offset, size: float, x: np.ndarray) -> bool:
        u, resid = self.parameter(x)
        tol = RAY_TRANSVERSE_TOL
        return resid <= tol and offset - size - tol <= u <= offset + size + tol


@dataclass(frozen=True, eq=False)
class Coverand:
    shape: BallShape | RayShape
    anchor: np.ndarray
    size: float
    offset: float | None = None

    def __post_init__(self):
        if not self.size > 0:
            raise ContractError("coverand size must be positive")
        object.__setattr__(self, "anchor", as_point(self.shape.space, self.anchor))

    @property
    def kind(self) -> ShapeKind:
        return self.shape.kind

    @property
    def interval(self) -> tuple[float, float]:
        if self.offset is None:
            raise TypeError("only ray segments have a parameter interval")
        return self.offset - self.size, self.offset + self.size

    def __repr__(self):
        extra = f", u={self.interval}" if self.offset is not None else ""
        return f"Coverand({self.kind.value}, anchor={self.anchor.tolist()}, size={self.size!r}{extra})"


def ball(space: LpSpace, anchor, size: float) -> Coverand:
    return Coverand(BallShape(space), anchor, float(size))


def ray_segment(space: LpSpace, origin, direction, u_lo: float, u_hi: float) -> Coverand:
    if not u_hi > u_lo:
        raise ContractError("segment must have positive length")
    shape = RayShape(space, origin, direction)
    mid = 0.5 * (u_lo + u_hi)
    return Coverand(shape, shape.anchor_of(mid), 0.5 * (u_hi - u_lo), mid)


def subdivide(c: Coverand) -> list[Coverand]:
    offsets = None if c.offset is None else np.array([c.offset])
    anchors, child_offsets, _ = c.shape.children(c.anchor[None, :], offsets, c.size)
    half = c.size / 2.0
    if child_offsets is None:
        return [Coverand(c.shape, a, half) for a in anchors]
    return [Coverand(c.shape, a, half, float(u)) for a, u in zip(anchors, child_offsets)]


def contains(c: Coverand, x) -> bool:
    x = as_point(c.shape.space, x)
    return c.shape.contains(c.anchor, c.offset, c.size, x)


@dataclass(frozen=True, eq=False)
class CoverFamily:
    """Surviving coverands of one refinement level, stored as stacked anchors."""

    level: int
    radius: float
    shape: BallShape | RayShape
    anchors: np.ndarray
    offsets: np.ndarray | None = None

    def __len__(self):
        return len(self.anchors)

    @property
    def members(self) -> list[Coverand]:
        if self.offsets is None:
            return [Coverand(self.shape, a, self.radius) for a in self.anchors]
        return [Coverand(self.shape, a, self.radius, float(u)) for a, u in zip(self.anchors, self.offsets)]

    @classmethod
    def of(cls, level: int, members: list[Coverand]) -> "CoverFamily":
        if not members:
            raise ContractError("a family needs at least one member")
        radius = members[0].size
        if any(c.size != radius for c in members):
            raise ContractError("family members must share one size")
        offsets = None if members[0].offset is None else np.array([c.offset for c in members])
        return cls(level, radius, members[0].shape, np.stack([c.anchor for c in members]), offsets)


def family_spread(fam: CoverFamily, pivot) -> float:
    """r_k plus the largest distance from ``pivot`` to any member anchor."""
    if len(fam) == 0:
        raise ContractError("family is empty")
    pivot = as_point(fam.shape.space, pivot)
    return float(fam.radius + distances(fam.shape.space, fam.anchors, pivot).max())
