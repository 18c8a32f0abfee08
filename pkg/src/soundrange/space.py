"""Finite-dimensional l_p spaces R^m_p, 1 <= p < inf.

Points are plain 1-D ``numpy.float64`` arrays.  Every function here also
accepts a stack of points (shape ``(N, m)``) where that makes sense, which is
what the covering algorithms use in their inner loops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, UndefinedDirectionError

__all__ = ["LpSpace", "as_point", "as_points", "distance", "distances", "norm", "norms", "scale_to_sphere"]


@dataclass(frozen=True)
class LpSpace:
    dim: int
    p: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ContractError(f"dimension must be a positive integer, got {self.dim!r}")
        if not (math.isfinite(self.p) and self.p >= 1.0):
            raise ContractError(f"exponent p must lie in [1, inf), got {self.p!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", float(self.p))

    @property
    def strictly_convex(self) -> bool:
        return self.p > 1.0

    @property
    def zero(self) -> np.ndarray:
        return np.zeros(self.dim)

    def box_factor(self) -> float:
        """m**(1/p): the l_p length of the all-ones vector, i.e. l_inf -> l_p blow-up."""
        return self.dim ** (1.0 / self.p)


def as_point(space: LpSpace, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0 and space.dim == 1:
        arr = arr.reshape(1)
    if arr.shape != (space.dim,):
        raise ContractError(f"expected a point of dimension {space.dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError("point coordinates must be finite")
    return arr


def as_points(space: LpSpace, xs) -> np.ndarray:
    arr = np.asarray(xs, dtype=np.float64)
    if space.dim == 1 and arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != space.dim:
        raise ContractError(f"expected points of dimension {space.dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError("point coordinates must be finite")
    return arr


def _lp(diff: np.ndarray, p: float) -> np.ndarray:
    diff = np.asarray(diff, dtype=np.float64)
    lead = diff.shape[:-1]
    # always go through the 2-D array loops: numpy scalar ** rounds differently
    a = np.abs(diff).reshape(-1, diff.shape[-1])
    if p == 1.0:
        out = a.sum(axis=1)
    elif p == 2.0:
        out = np.sqrt(np.einsum("ij,ij->i", a, a))
    else:
        # scale by the max coordinate so |x|**p neither overflows nor underflows
        top = a.max(axis=1)
        safe = np.where(top > 0, top, 1.0)
        out = top * ((a / safe[:, None]) ** p).sum(axis=1) ** (1.0 / p)
    return out.reshape(lead)


def distance(space: LpSpace, a, b) -> float:
    a = as_point(space, a)
    b = as_point(space, b)
    return float(_lp(a - b, space.p))


def distances(space: LpSpace, xs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Distances from each row of ``xs`` to ``y``; also broadcasts ``(N,1,m)`` against ``(n,m)``."""
    return _lp(np.asarray(xs) - np.asarray(y), space.p)


def norm(space: LpSpace, a) -> float:
    return float(_lp(as_point(space, a), space.p))


def norms(space: LpSpace, xs: np.ndarray) -> np.ndarray:
    return _lp(np.asarray(xs), space.p)


def scale_to_sphere(space: LpSpace, a) -> np.ndarray:
    """Return a / ||a||, the unit vector positively proportional to ``a``."""
    a = as_point(space, a)
    n = float(_lp(a, space.p))
    if n == 0.0:
        raise UndefinedDirectionError("the zero vector has no direction")
    return a / n
