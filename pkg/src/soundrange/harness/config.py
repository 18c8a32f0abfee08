"""Scenario files: INI sections of ``key = value`` lines, lists comma-separated.

A minimal RC scenario::

    [scenario]
    algorithm = rc

    [space]
    dim = 2
    p = 5.6789

    [sensors]
    kind = random_box
    count = 64
    low = -10
    high = 10
    seed = 1

    [source]
    kind = random_box
    low = -10
    high = 10
    seed = 2

    [solver]
    delta = 0.1

See the README for every recognised key.
"""
from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError

__all__ = ["Scenario", "parse_scenario", "load_scenario", "APPENDIX_CONFIG", "appendix_scenario"]

ALGORITHMS = ("rc", "sphere", "epsnet")
SENSOR_KINDS = ("random_box", "canonical_l2", "explicit")
SOURCE_KINDS = ("random_box", "explicit")


@dataclass(frozen=True)
class Scenario:
    algorithm: str
    dim: int
    p: float
    sensor_kind: str = "random_box"
    sensor_count: int = 0
    sensor_low: float = -10.0
    sensor_high: float = 10.0
    sensor_seed: int = 0
    sensor_points: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    source_kind: str = "explicit"
    source_point: tuple[float, ...] = ()
    source_low: float = -10.0
    source_high: float = 10.0
    source_seed: int = 0
    emit_time: float = 0.0
    delta: float = 0.1
    defect: str = "sup"
    max_level: int = 60
    max_family: int = 10_000_000
    workers: int = 1
    witness_pruning: bool = False
    initial_center: tuple[float, ...] = ()
    initial_radius: float = 0.0
    sphere_bound: float = 5.0
    sphere_samples: int = 720
    sphere_tol: float = 1e-6
    epsnet_radius: float = 1.0
    epsnet_actives: tuple[int, ...] = ()
    epsnet_budget: int = 100_000
    name: str = ""

    def digest(self) -> str:
        """SHA-256 of the scenario's canonical JSON; ``workers`` is excluded since it never changes results."""
        body = dataclasses.asdict(self)
        body.pop("workers")
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


def _floats(text: str) -> tuple[float, ...]:
    parts = [t for t in text.replace(";", ",").split(",") if t.strip()]
    return tuple(float(t) for t in parts)


_FIELDS = {
    # (section, key): (field, converter)
    ("scenario", "algorithm"): ("algorithm", str.lower),
    ("scenario", "name"): ("name", str),
    ("space", "dim"): ("dim", int),
    ("space", "p"): ("p", float),
    ("sensors", "kind"): ("sensor_kind", str.lower),
    ("sensors", "count"): ("sensor_count", int),
    ("sensors", "low"): ("sensor_low", float),
    ("sensors", "high"): ("sensor_high", float),
    ("sensors", "seed"): ("sensor_seed", int),
    ("sensors", "points"): ("sensor_points", _floats),
    ("sensors", "weights"): ("weights", _floats),
    ("source", "kind"): ("source_kind", str.lower),
    ("source", "point"): ("source_point", _floats),
    ("source", "low"): ("source_low", float),
    ("source", "high"): ("source_high", float),
    ("source", "seed"): ("source_seed", int),
    ("source", "emit_time"): ("emit_time", float),
    ("solver", "delta"): ("delta", float),
    ("solver", "defect"): ("defect", str.lower),
    ("solver", "max_level"): ("max_level", int),
    ("solver", "max_family"): ("max_family", int),
    ("solver", "workers"): ("workers", int),
    ("solver", "witness_pruning"): ("witness_pruning", None),
    ("initial", "center"): ("initial_center", _floats),
    ("initial", "radius"): ("initial_radius", float),
    ("sphere", "bound"): ("sphere_bound", float),
    ("sphere", "samples"): ("sphere_samples", int),
    ("sphere", "tol"): ("sphere_tol", float),
    ("epsnet", "radius"): ("epsnet_radius", float),
    ("epsnet", "actives"): ("epsnet_actives", lambda t: tuple(int(v) for v in _floats(t))),
    ("epsnet", "budget"): ("epsnet_budget", int),
}


def parse_scenario(text: str) -> Scenario:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            spec = _FIELDS.get((section, key))
            if spec is None:
                raise ConfigError(f"unknown key [{section}] {key}")
            name, conv = spec
            try:
                values[name] = parser.getboolean(section, key) if conv is None else conv(raw.strip())
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from exc
    for required in ("algorithm", "dim", "p"):
        if required not in values:
            raise ConfigError(f"missing required setting {required!r}")
    sc = Scenario(**values)
    _validate(sc)
    return sc


def _validate(sc: Scenario):
    if sc.algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
    if sc.dim < 1 or sc.p < 1:
        raise ConfigError("need dim >= 1 and p >= 1")
    if sc.sensor_kind not in SENSOR_KINDS:
        raise ConfigError(f"sensor kind must be one of {SENSOR_KINDS}")
    if sc.source_kind not in SOURCE_KINDS:
        raise ConfigError(f"source kind must be one of {SOURCE_KINDS}")
    if sc.defect not in ("sup", "sum"):
        raise ConfigError("defect must be 'sup' or 'sum'")
    if not sc.delta > 0:
        raise ConfigError("delta must be positive")
    if sc.source_kind == "explicit" and len(sc.source_point) != sc.dim:
        raise ConfigError(f"source point needs {sc.dim} coordinates")
    if sc.algorithm != "sphere":
        if sc.sensor_kind == "random_box" and sc.sensor_count < 1:
            raise ConfigError("random_box sensors need count >= 1")
        if sc.sensor_kind == "explicit" and (not sc.sensor_points or len(sc.sensor_points) % sc.dim):
            raise ConfigError("explicit sensor points must be a non-empty multiple of dim coordinates")
    if sc.initial_center and len(sc.initial_center) != sc.dim:
        raise ConfigError(f"initial center needs {sc.dim} coordinates")


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_scenario(text)


APPENDIX_CONFIG = """\
[scenario]
name = appendix
algorithm = rc

[space]
dim = 2
p = 5.6789

[sensors]
kind = random_box
count = 64
low = -10
high = 10
seed = {seed}

[source]
kind = random_box
low = -10
high = 10
seed = {source_seed}
emit_time = 0

[solver]
delta = 0.1
defect = sup
"""


def appendix_scenario(seed: int = 1) -> Scenario:
    """The m=2, p=5.6789, 64-sensor, delta=0.1 setup; sensors use ``seed``, the source ``seed + 1_000_003``."""
    return parse_scenario(APPENDIX_CONFIG.format(seed=seed, source_seed=seed + 1_000_003))
