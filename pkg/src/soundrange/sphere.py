"""Dense sensors on the unit sphere of a strictly convex l_p space.

With R = S[0; 1] the arrival landscape t_r = t0 + ||r - s|| has a unique
minimiser b = s/||s|| and maximiser w = -b.  The gap t_w - t_b equals
2||s|| while the source is inside the unit ball, which gives s in closed
form; once ||s|| >= 1 the gap saturates at 2 and the source is instead
searched for on the ray {d*b : d >= 1} with the RC loop over segments,
using one extra sensor off the line through +-b.

The sphere is never stored.  It is represented by an arrival oracle, and its
extremes are located by coarse sampling followed by a 1-D line search in
tangent coordinates.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .cover import ray_segment
from .errors import ContractError, InconsistentArrivalsError, NotStrictlyConvexError, SolverError
from .rc import Halt, LevelRecord, RcConfig, SolveReport, rc_solve
from .space import LpSpace, as_point, distance, norm, norms, scale_to_sphere

__all__ = [
    "Region",
    "SphericalArrival",
    "RayProblem",
    "SphereResult",
    "arrival_oracle",
    "sphere_directions",
    "find_extremes",
    "classify",
    "recover_inside",
    "make_ray_problem",
    "ray_defect",
    "solve_outside",
    "recover_outside",
    "sphere_solve",
    "line_sphere_crossings",
    "witness_defect",
]

Oracle = Callable[[np.ndarray], float]

CLASSIFY_TOL = 1e-6
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Region(str, enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"


def _check_space(space: LpSpace):
    if not space.strictly_convex:
        raise NotStrictlyConvexError(f"p = {space.p} does not give a strictly convex norm")
    if space.dim < 2:
        raise ContractError("the dense-sphere method needs dimension >= 2")


def arrival_oracle(space: LpSpace, source, emit_time: float = 0.0) -> Oracle:
    """Arrival moment at any sensor position for a known source (test/demo fixture)."""
    s = as_point(space, source)

    def oracle(r):
        return emit_time + distance(space, r, s)

    return oracle


def sphere_directions(space: LpSpace, count: int) -> np.ndarray:
    """A deterministic, roughly even set of ``count`` unit vectors of the l_p sphere."""
    if space.dim == 2:
        ang = 2.0 * math.pi * np.arange(count) / count
        e = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    elif space.dim == 3:
        # Fibonacci lattice
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        phi = math.pi * (3.0 - math.sqrt(5.0)) * i
        rad = np.sqrt(1.0 - z * z)
        e = np.stack([rad * np.cos(phi), rad * np.sin(phi), z], axis=1)
    else:
        raise ContractError("sphere sampling is implemented for dimensions 2 and 3")
    return e / norms(space, e)[:, None]


def _tangent_basis(u: np.ndarray) -> np.ndarray:
    # Euclidean orthonormal complement of u; rows span the tangent directions
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(len(u))]))
    return q[:, 1 : len(u)].T


def _golden(g: Callable[[float], float], lo: float, hi: float, width: float) -> float:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    gc, gd = g(c), g(d)
    while b - a > width:
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - GOLDEN * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + GOLDEN * (b - a)
            gd = g(d)
    return 0.5 * (a + b)


def _polish(g: Callable[[float], float], x: float, half: float, tol: float, h: float = 1e-5) -> float:
    """Bisect on the sign of a central difference; resolves the minimiser below
    the ~sqrt(eps) floor that value comparisons hit on a flat minimum."""
    a, b = x - half, x + half
    while b - a > tol:
        m = 0.5 * (a + b)
        slope = g(m + h) - g(m - h)
        if slope > 0:
            b = m
        elif slope < 0:
            a = m
        else:
            break
    return 0.5 * (a + b)


def _line_minimise(space: LpSpace, f: Oracle, u0: np.ndarray, span: float, tol: float) -> np.ndarray:
    u = u0
    for _ in range(60):
        moved = 0.0
        for e in _tangent_basis(u):
            def g(a, u=u, e=e):
                return f(scale_to_sphere(space, u + a * e))

            a = _golden(g, -span, span, 1e-6)
            a = _polish(g, a, 2e-6, tol)
            u = scale_to_sphere(space, u + a * e)
            moved = max(moved, abs(a))
        if moved <= tol or space.dim == 2 and moved < span:
            break
        span = max(4.0 * moved, 1e-5)
    return u


@dataclass(frozen=True, eq=False)
class SphericalArrival:
    space: LpSpace
    oracle: Oracle
    t_b: float
    b: np.ndarray
    t_w: float
    w: np.ndarray


def find_extremes(space: LpSpace, oracle: Oracle, m_samples: int = 720, tol: float = 1e-10) -> SphericalArrival:
    """Locate the earliest (b) and latest (w) arrival on the unit sphere."""
    _check_space(space)
    dirs = sphere_directions(space, m_samples)
    vals = np.array([oracle(u) for u in dirs])
    # tangent half-width covering the neighbouring samples
    span = 2.5 * math.sqrt(4.0 * math.pi / m_samples) if space.dim == 3 else 2.5 * 2.0 * math.pi / m_samples
    b = _line_minimise(space, oracle, dirs[int(np.argmin(vals))], span, tol)
    w = _line_minimise(space, lambda r: -oracle(r), dirs[int(np.argmax(vals))], span, tol)
    return SphericalArrival(space, oracle, float(oracle(b)), b, float(oracle(w)), w)


def classify(arr: SphericalArrival, tol: float = CLASSIFY_TOL) -> Region:
    gap = arr.t_w - arr.t_b
    if gap > 2.0 + tol:
        raise InconsistentArrivalsError(f"t_w - t_b = {gap!r} exceeds 2; no source produces these arrivals")
    if abs(gap - 2.0) <= tol:
        return Region.OUTSIDE
    return Region.INSIDE


def recover_inside(arr: SphericalArrival, tol: float = CLASSIFY_TOL) -> np.ndarray:
    if classify(arr, tol) is not Region.INSIDE:
        raise ContractError("closed-form recovery needs a source strictly inside the unit sphere")
    return 0.5 * (arr.t_w - arr.t_b) * arr.b


@dataclass(frozen=True, eq=False)
class RayProblem:
    """Source search on the ray {d*b : d >= 1}, with the three sensors b, -b and r.

    Exposes ``space`` and ``defect_many`` so the RC loop can drive it.
    """

    space: LpSpace
    direction: np.ndarray
    third_sensor: np.ndarray
    t_b: float
    t_w: float
    t_r: float
    bound: float

    def __post_init__(self):
        _check_space(self.space)
        b = as_point(self.space, self.direction)
        r = as_point(self.space, self.third_sensor)
        if abs(norm(self.space, b) - 1.0) > 1e-9 or abs(norm(self.space, r) - 1.0) > 1e-9:
            raise ContractError("direction and third sensor must be unit vectors")
        if min(distance(self.space, r, b), distance(self.space, r, -b)) <= 1e-6:
            raise ContractError("the third sensor must differ from +-direction")
        if not self.bound > 0:
            raise ContractError("bound M must be positive")
        object.__setattr__(self, "direction", b)
        object.__setattr__(self, "third_sensor", r)

    def defect_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64).reshape(-1, self.space.dim)
        return np.abs(self.t_r - self.t_b - norms(self.space, xs - self.third_sensor) + norms(self.space, xs) - 1.0)


def make_ray_problem(arr: SphericalArrival, bound: float, m_samples: int = 360) -> RayProblem:
    space = arr.space
    dirs = sphere_directions(space, m_samples)
    b = arr.b
    clearance = np.minimum(norms(space, dirs - b), norms(space, dirs + b))
    r = dirs[int(np.argmax(clearance))]
    return RayProblem(space, b, r, arr.t_b, arr.t_w, float(arr.oracle(r)), float(bound))


def ray_defect(rp: RayProblem, d: float) -> float:
    if d < 1.0:
        raise ContractError("ray points have d >= 1")
    return float(rp.defect_many(d * rp.direction)[0])


def solve_outside(rp: RayProblem, delta: float, sink: Callable[[LevelRecord], None] | None = None, **cfg) -> SolveReport:
    init = ray_segment(rp.space, rp.space.zero, rp.direction, 0.0, rp.bound)
    return rc_solve(rp, RcConfig(delta, init, **cfg), sink)


def recover_outside(rp: RayProblem, delta: float) -> np.ndarray:
    report = solve_outside(rp, delta)
    if report.halt is not Halt.PRECISION_REACHED:
        raise SolverError(f"ray search stopped with {report.halt.value}")
    return report.approx


@dataclass
class SphereResult:
    approx: np.ndarray
    region: Region
    arrival: SphericalArrival
    report: SolveReport | None = None


def sphere_solve(
    space: LpSpace,
    oracle: Oracle,
    delta: float,
    bound: float,
    m_samples: int = 720,
    tol: float = CLASSIFY_TOL,
    sink: Callable[[LevelRecord], None] | None = None,
) -> SphereResult:
    arr = find_extremes(space, oracle, m_samples)
    region = classify(arr, tol)
    if region is Region.INSIDE:
        return SphereResult(recover_inside(arr, tol), region, arr)
    report = solve_outside(make_ray_problem(arr, bound), delta, sink)
    if report.halt is not Halt.PRECISION_REACHED:
        raise SolverError(f"ray search stopped with {report.halt.value}")
    return SphereResult(report.approx, region, arr, report)


def line_sphere_crossings(space: LpSpace, s, x) -> tuple[np.ndarray, np.ndarray]:
    """Where the line through s and x (both in the unit ball) meets the unit sphere.

    Returns ``(u_plus, u_minus)``: u_plus lies beyond x, u_minus behind s.
    """
    s = as_point(space, s)
    x = as_point(space, x)
    gap = distance(space, x, s)
    if gap == 0.0:
        raise ContractError("s and x must differ")
    v = (x - s) / gap
    reach = norm(space, s) + 1.0

    def f(d):
        return norm(space, s + d * v) - 1.0

    lo = gap if f(gap) < 0 else None
    d_plus = gap if lo is None else brentq(f, gap, reach + 1e-9, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    f0 = f(0.0)
    d_minus = 0.0 if f0 >= 0 else brentq(f, -reach - 1e-9, 0.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return s + d_plus * v, s + d_minus * v


def witness_defect(space: LpSpace, s, x, emit_time: float = 0.0) -> float:
    """|tau_{u+}(x) - tau_{u-}(x)|, a lower bound of D_inf(x) under full spherical sensing."""
    u_plus, u_minus = line_sphere_crossings(space, s, x)
    t_plus = emit_time + distance(space, u_plus, s)
    t_minus = emit_time + distance(space, u_minus, s)
    return abs((t_plus - distance(space, x, u_plus)) - (t_minus - distance(space, x, u_minus)))
