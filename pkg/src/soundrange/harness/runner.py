"""Scenario generation, dispatch to the solvers, and run records."""
from __future__ import annotations

import itertools
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..cover import Coverand, ball
from ..epsnet import coordinate_balls, run_sequence
from ..errors import ConfigError
from ..problem import GroundTruth, SrpInstance
from ..rc import Halt, LevelRecord, RcConfig, rc_solve
from ..space import LpSpace, distance, distances
from ..sphere import arrival_oracle, sphere_solve
from .config import Scenario
from .rng import SplitMix64

__all__ = ["RunRecord", "generate", "initial_coverand", "run", "fmt", "rc_trace_line"]


def fmt(x: float) -> str:
    return f"{x:.17g}"


def _fmt_point(x) -> str:
    return ",".join(fmt(float(v)) for v in x)


def rc_trace_line(rec: LevelRecord) -> str:
    return f"iter {rec.level} coverands {rec.count} r_k {fmt(rec.radius)} d_k {fmt(rec.spread)}"


def _box(rng: SplitMix64, count: int, dim: int, low: float, high: float) -> np.ndarray:
    return np.array([[rng.uniform(low, high) for _ in range(dim)] for _ in range(count)])


def _sensors(sc: Scenario) -> np.ndarray:
    if sc.sensor_kind == "random_box":
        return _box(SplitMix64(sc.sensor_seed), sc.sensor_count, sc.dim, sc.sensor_low, sc.sensor_high)
    if sc.sensor_kind == "canonical_l2":
        # r_1 = -e_1, r_2 = 0, r_i = e_{i-2}
        eye = np.eye(sc.dim)
        return np.vstack([-eye[:1], np.zeros((1, sc.dim)), eye])
    return np.asarray(sc.sensor_points, dtype=np.float64).reshape(-1, sc.dim)


def _source(sc: Scenario) -> np.ndarray:
    if sc.source_kind == "explicit":
        return np.asarray(sc.source_point, dtype=np.float64)
    return _box(SplitMix64(sc.source_seed), 1, sc.dim, sc.source_low, sc.source_high)[0]


def initial_coverand(sc: Scenario, sensors: np.ndarray) -> Coverand:
    """The configured initial ball, or one around the middle of the sensor and source boxes covering both."""
    space = LpSpace(sc.dim, sc.p)
    if sc.initial_center:
        if not sc.initial_radius > 0:
            raise ConfigError("[initial] radius must be positive")
        return ball(space, sc.initial_center, sc.initial_radius)
    if sc.sensor_kind == "random_box":
        lo = np.full(sc.dim, sc.sensor_low)
        hi = np.full(sc.dim, sc.sensor_high)
    else:
        lo, hi = sensors.min(axis=0), sensors.max(axis=0)
    if sc.source_kind == "random_box":
        lo = np.minimum(lo, sc.source_low)
        hi = np.maximum(hi, sc.source_high)
    else:
        src = np.asarray(sc.source_point)
        lo, hi = np.minimum(lo, src), np.maximum(hi, src)
    centre = 0.5 * (lo + hi)
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    radius = float(distances(space, corners, centre).max())
    return ball(space, centre, max(radius, 1.0))


def generate(sc: Scenario) -> tuple[SrpInstance, GroundTruth]:
    """Sensors, source and exact arrival times for a sensor-list scenario (rc or epsnet)."""
    if sc.algorithm == "sphere":
        raise ConfigError("sphere scenarios have no sensor list; use sphere_oracle")
    space = LpSpace(sc.dim, sc.p)
    sensors = _sensors(sc)
    if len(sensors) == 0:
        raise ConfigError("scenario has no sensors")
    source = _source(sc)
    weights = np.asarray(sc.weights) if sc.weights else None
    if weights is not None and len(weights) != len(sensors):
        raise ConfigError("one weight per sensor is required")
    inst = SrpInstance.from_truth(space, sensors, source, sc.emit_time, weights=weights, defect_kind=sc.defect)
    if sc.algorithm == "rc":
        init = initial_coverand(sc, sensors)
        if distance(space, source, init.anchor) > init.size:
            raise ConfigError("the source lies outside the initial coverand")
    return inst, inst.truth


def sphere_oracle(sc: Scenario):
    space = LpSpace(sc.dim, sc.p)
    source = _source(sc)
    return arrival_oracle(space, source, sc.emit_time), GroundTruth(source, sc.emit_time)


@dataclass
class RunRecord:
    digest: str
    algorithm: str
    trace: list[str]
    approx: list[float]
    source: list[float]
    error: float
    status: str
    wall_time: float
    details: dict = field(default_factory=dict)

    def recomputed_error(self, scenario: Scenario) -> float:
        return distance(LpSpace(scenario.dim, scenario.p), self.approx, self.source)

    def to_json(self, with_timing: bool = True) -> str:
        body = asdict(self)
        if not with_timing:
            body.pop("wall_time")
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    def write_trace(self, path: str | Path):
        Path(path).write_text("".join(line + "\n" for line in self.trace), encoding="utf-8")

    def write_json(self, path: str | Path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    def summary(self) -> str:
        lines = []
        for line in self.trace:
            parts = line.split()
            if parts[0] == "iter":
                lines.append(f"Iteration {parts[1]}: {parts[3]} coverands")
        lines += [
            f"Approximated source: Point({self.approx})",
            f"Real source: Point({self.source})",
            f"Distance error: {self.error!r}",
            f"Status: {self.status}",
            f"Time: {self.wall_time:.8f} sec",
        ]
        return "\n".join(lines)


def run(sc: Scenario, workers: int | None = None) -> RunRecord:
    """Solve one scenario.  Solver exceptions propagate to the caller."""
    space = LpSpace(sc.dim, sc.p)
    workers = sc.workers if workers is None else workers
    trace: list[str] = []
    details: dict = {}
    start = time.perf_counter()
    if sc.algorithm == "rc":
        inst, truth = generate(sc)
        cfg = RcConfig(
            sc.delta,
            initial_coverand(sc, inst.sensors),
            max_level=sc.max_level,
            max_family=sc.max_family,
            workers=workers,
            witness_pruning=sc.witness_pruning,
        )
        report = rc_solve(inst, cfg, lambda rec: trace.append(rc_trace_line(rec)))
        approx, status = report.approx, report.halt.value
    elif sc.algorithm == "sphere":
        oracle, truth = sphere_oracle(sc)
        res = sphere_solve(
            space, oracle, sc.delta, sc.sphere_bound, sc.sphere_samples, sc.sphere_tol,
            sink=lambda rec: trace.append(rc_trace_line(rec)),
        )
        arr = res.arrival
        trace.insert(0, f"extremes t_b {fmt(arr.t_b)} t_w {fmt(arr.t_w)} b {_fmt_point(arr.b)} region {res.region.value}")
        approx = res.approx
        status = Halt.PRECISION_REACHED.value if res.report is None else res.report.halt.value
        details["region"] = res.region.value
    else:
        inst, truth = generate(sc)
        fam = coordinate_balls(space, sc.epsnet_radius, sc.epsnet_actives or None)

        def sink(rec):
            centre = "-" if rec.center is None else _fmt_point(rec.center)
            trace.append(f"n {rec.n} k {rec.k} survivors {rec.survivors} center {centre}")

        state = run_sequence(inst, fam, sc.epsnet_budget, sink)
        approx, status = state.current, state.stop.value
        details.update(
            mu={str(n): mu for n, mu in state.mu.items()},
            final_n=state.n,
            final_k=state.k,
            final_radius=state.radius,
            steps=state.steps,
        )
    wall = time.perf_counter() - start
    err = distance(space, approx, truth.source)
    return RunRecord(
        sc.digest(), sc.algorithm, trace, [float(v) for v in approx], [float(v) for v in truth.source],
        err, status, wall, details,
    )
