"""Sound-ranging instances: backward moments, defects and the ball tests.

For a candidate point x the backward moment of sensor i is
``tau_i(x) = t_i - rho(x, r_i)``, the emission moment x would need for the
wave to reach sensor i on time.  The defect measures how much these moments
disagree; it vanishes exactly at solutions and is 2-Lipschitz, which is what
makes the cheap exclusion test ``D(c) > 2r  =>  s not in B[c; r]`` sound.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError
from .space import LpSpace, as_point, as_points, distance, distances

__all__ = [
    "DefectKind",
    "GroundTruth",
    "SrpInstance",
    "BALL_TEST_SLACK",
    "backward_moment",
    "defect_sup",
    "defect_sum",
    "defect",
    "ball_test",
    "exclusion_by_witness",
    "is_solution",
]

# Rounding slack for D(c) <= 2r.  A false exclusion loses the source for good,
# a false inclusion only costs one more coverand.
BALL_TEST_SLACK = 1e-12


class DefectKind(str, enum.Enum):
    SUP = "sup"
    SUM = "sum"


@dataclass(frozen=True)
class GroundTruth:
    source: np.ndarray
    emit_time: float = 0.0


@dataclass(frozen=True, eq=False)
class SrpInstance:
    """Sensors, arrival moments and the defect choice.

    ``sensors`` has shape ``(n, m)``.  ``weights`` defaults to the uniform
    distribution and is only consulted by the weighted (SUM) defect.
    """

    space: LpSpace
    sensors: np.ndarray
    times: np.ndarray
    weights: np.ndarray = None
    defect_kind: DefectKind = DefectKind.SUP
    truth: GroundTruth | None = field(default=None, repr=False)

    def __post_init__(self):
        sensors = as_points(self.space, self.sensors)
        if len(sensors) == 0:
            raise ContractError("at least one sensor is required")
        times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        if times.shape != (len(sensors),):
            raise ContractError("times and sensors must have the same length")
        if not np.all(np.isfinite(times)):
            raise ContractError("arrival times must be finite")
        if self.weights is None:
            weights = np.full(len(sensors), 1.0 / len(sensors))
        else:
            weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
            if weights.shape != times.shape:
                raise ContractError("weights and sensors must have the same length")
            if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
                raise ContractError("weights must be positive and sum to 1")
        for name, arr in (("sensors", sensors), ("times", times), ("weights", weights)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "defect_kind", DefectKind(self.defect_kind))

    @classmethod
    def from_truth(cls, space: LpSpace, sensors, source, emit_time: float = 0.0, **kwargs) -> "SrpInstance":
        """Build the instance whose arrival times are t_i = t0 + rho(r_i, s)."""
        sensors = as_points(space, sensors)
        source = as_point(space, source)
        times = emit_time + distances(space, sensors, source)
        return cls(space, sensors, times, truth=GroundTruth(source, float(emit_time)), **kwargs)

    @property
    def size(self) -> int:
        return len(self.sensors)

    def with_defect(self, kind: DefectKind | str) -> "SrpInstance":
        return replace(self, defect_kind=DefectKind(kind))

    # Vectorised kernels: xs is (N, m); results are length N.

    def moments_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64).reshape(-1, self.space.dim)
        return self.times[None, :] - distances(self.space, xs[:, None, :], self.sensors[None, :, :])

    def defect_many(self, xs: np.ndarray) -> np.ndarray:
        tau = self.moments_many(xs)
        if self.defect_kind is DefectKind.SUP:
            return tau.max(axis=1) - tau.min(axis=1)
        mean = tau @ self.weights
        return np.abs(tau - mean[:, None]) @ self.weights


def backward_moment(inst: SrpInstance, i: int, x) -> float:
    if not 0 <= i < inst.size:
        raise IndexError(f"sensor index {i} out of range 0..{inst.size - 1}")
    x = as_point(inst.space, x)
    return float(inst.times[i] - distance(inst.space, x, inst.sensors[i]))


def defect_sup(inst: SrpInstance, x) -> float:
    x = as_point(inst.space, x)
    tau = inst.moments_many(x[None, :])[0]
    return float(tau.max() - tau.min())


def defect_sum(inst: SrpInstance, x) -> float:
    x = as_point(inst.space, x)
    tau = inst.moments_many(x[None, :])[0]
    return float(np.abs(tau - tau @ inst.weights) @ inst.weights)


def defect(inst: SrpInstance, x) -> float:
    if inst.defect_kind is DefectKind.SUP:
        return defect_sup(inst, x)
    return defect_sum(inst, x)


def ball_test(inst: SrpInstance, c, r: float) -> bool:
    """True keeps B[c; r] as suspicious; False certifies the source is not in it."""
    if not r > 0:
        raise ContractError("ball radius must be positive")
    return defect(inst, c) <= 2.0 * r + BALL_TEST_SLACK


def exclusion_by_witness(inst: SrpInstance, x, y, r: float) -> bool:
    """Certify s not in B[y; r] from a single point x of that ball.

    Works whenever D(x) > 0 and r < D(x)/4; the centre's defect is never
    needed.
    """
    if not r > 0:
        raise ContractError("ball radius must be positive")
    if distance(inst.space, x, y) > r:
        raise ContractError("the witness must lie in the tested ball")
    d = defect(inst, x)
    return d > 0.0 and r < d / 4.0


def is_solution(inst: SrpInstance, x, tol: float) -> bool:
    if tol < 0:
        raise ContractError("tolerance must be non-negative")
    return defect(inst, x) <= tol
