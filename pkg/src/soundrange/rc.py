"""Refining-cover (RC) search for the source.

Each level halves the coverand size, subdivides every survivor and keeps the
children whose anchor passes the ball test D(z) <= 2 r_k.  The source always
stays inside some survivor, so once the survivors are packed tighter than
``delta`` around one of them, that anchor is within ``delta`` of the source.
"""
from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Protocol

import numpy as np

from .cover import Coverand, CoverFamily, family_spread
from .errors import ContractError, NoSurvivorsError
from .problem import BALL_TEST_SLACK, DefectKind, SrpInstance
from .space import LpSpace, distances

log = logging.getLogger(__name__)

# below this many anchors threading costs more than it saves
PARALLEL_MIN = 2048

__all__ = ["Halt", "LevelRecord", "RcConfig", "SolveReport", "rc_solve", "rc_sequence", "rc_families", "refine"]


class DefectSource(Protocol):
    space: LpSpace

    def defect_many(self, xs: np.ndarray) -> np.ndarray: ...


class Halt(str, enum.Enum):
    PRECISION_REACHED = "precision_reached"
    BUDGET_EXHAUSTED = "budget_exhausted"
    FAMILY_OVERFLOW = "family_overflow"


@dataclass(frozen=True)
class LevelRecord:
    level: int
    radius: float
    count: int
    spread: float


@dataclass(frozen=True)
class RcConfig:
    delta: float
    initial: Coverand
    defect_kind: DefectKind | None = None
    max_level: int = 60
    max_family: int = 10_000_000
    workers: int = 1
    witness_pruning: bool = False

    def __post_init__(self):
        if not self.delta > 0:
            raise ContractError("delta must be positive")
        if self.max_level < 1 or self.max_family < 1:
            raise ContractError("max_level and max_family must be positive")


@dataclass
class SolveReport:
    approx: np.ndarray
    levels: list[LevelRecord] = field(default_factory=list)
    halt: Halt = Halt.BUDGET_EXHAUSTED


@dataclass
class _Level:
    family: CoverFamily
    pivot: np.ndarray
    spread: float
    candidates: int
    defects: np.ndarray


def _evaluate(problem: DefectSource, anchors: np.ndarray, workers: int) -> np.ndarray:
    if workers <= 1 or len(anchors) < PARALLEL_MIN:
        return problem.defect_many(anchors)
    chunks = np.array_split(anchors, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(problem.defect_many, chunks)))


def _dedup(anchors: np.ndarray, offsets, owners: np.ndarray):
    if len(anchors) < 2:
        return anchors, offsets, owners
    key = np.ascontiguousarray(anchors).view(np.dtype((np.void, anchors.dtype.itemsize * anchors.shape[1])))
    _, first = np.unique(key.reshape(-1), return_index=True)
    first.sort()
    return anchors[first], None if offsets is None else offsets[first], owners[first]


def _lex_order(anchors: np.ndarray) -> np.ndarray:
    return np.lexsort(anchors.T[::-1])


def refine(problem: DefectSource, family: CoverFamily, parent_defects: np.ndarray | None, cfg: RcConfig) -> _Level | None:
    """One RC level: subdivide, merge equal anchors, test, order, pick the pivot.

    Returns None when the candidate family would exceed ``cfg.max_family``.
    Raises NoSurvivorsError when nothing passes the test.
    """
    shape = family.shape
    r_k = family.radius / 2.0
    anchors, offsets, owners = shape.children(family.anchors, family.offsets, family.radius, merge_cells=True)
    anchors, offsets, owners = _dedup(anchors, offsets, owners)
    if len(anchors) > cfg.max_family:
        return None

    keep = np.ones(len(anchors), dtype=bool)
    if cfg.witness_pruning and parent_defects is not None:
        # parent anchor inside the child ball with D(parent) > 4 r_k certifies exclusion
        near = distances(shape.space, anchors, family.anchors[owners]) <= r_k
        keep &= ~(near & (parent_defects[owners] > 4.0 * r_k))

    d = np.full(len(anchors), np.inf)
    d[keep] = _evaluate(problem, anchors[keep], cfg.workers)
    keep &= d <= 2.0 * r_k + BALL_TEST_SLACK
    if not np.any(keep):
        raise NoSurvivorsError(f"no coverand survived at radius {r_k!r}")

    anchors, d = anchors[keep], d[keep]
    offsets = None if offsets is None else offsets[keep]
    order = _lex_order(anchors)
    anchors, d = anchors[order], d[order]
    offsets = None if offsets is None else offsets[order]
    fam = CoverFamily(family.level + 1, r_k, shape, anchors, offsets)
    pivot = anchors[0]
    return _Level(fam, pivot, family_spread(fam, pivot), len(keep), d)


def _start(problem, cfg: RcConfig):
    if cfg.defect_kind is not None and isinstance(problem, SrpInstance):
        problem = problem.with_defect(cfg.defect_kind)
    init = cfg.initial
    offsets = None if init.offset is None else np.array([init.offset])
    family = CoverFamily(0, init.size, init.shape, init.anchor[None, :], offsets)
    return problem, family


def _levels(problem, cfg: RcConfig, sink: Callable[[LevelRecord], None] | None) -> Iterator[tuple[_Level | None, LevelRecord | None]]:
    problem, family = _start(problem, cfg)
    parent_d = None
    for _ in range(cfg.max_level):
        step = refine(problem, family, parent_d, cfg)
        if step is None:
            log.warning("family overflow above %d anchors at level %d", cfg.max_family, family.level + 1)
            yield None, None
            return
        rec = LevelRecord(step.family.level, step.family.radius, len(step.family), step.spread)
        log.debug("level %d: %d coverands (of %d), r_k=%g, d_k=%g", rec.level, rec.count, step.candidates, rec.radius, rec.spread)
        if sink is not None:
            sink(rec)
        yield step, rec
        family, parent_d = step.family, step.defects


def rc_solve(problem: DefectSource, cfg: RcConfig, sink: Callable[[LevelRecord], None] | None = None) -> SolveReport:
    """Run RC levels until the spread d_k drops below ``cfg.delta``.

    ``problem`` is an :class:`SrpInstance` or anything else exposing ``space``
    and a vectorised ``defect_many``.  ``sink`` receives one record per level.
    """
    report = SolveReport(approx=cfg.initial.anchor.copy())
    for step, rec in _levels(problem, cfg, sink):
        if step is None:
            report.halt = Halt.FAMILY_OVERFLOW
            return report
        report.levels.append(rec)
        report.approx = step.pivot.copy()
        if rec.spread < cfg.delta:
            report.halt = Halt.PRECISION_REACHED
            return report
    report.halt = Halt.BUDGET_EXHAUSTED
    return report


def rc_sequence(problem: DefectSource, cfg: RcConfig, sink: Callable[[LevelRecord], None] | None = None) -> Iterator[np.ndarray]:
    """Yield the pivot of every level without ever stopping on precision.

    Ends after ``cfg.max_level`` levels, or early on family overflow.
    """
    for step, _ in _levels(problem, cfg, sink):
        if step is None:
            return
        yield step.pivot.copy()


def rc_families(problem: DefectSource, cfg: RcConfig) -> Iterator[CoverFamily]:
    """Yield each level's surviving family (instrumentation and tests)."""
    for step, _ in _levels(problem, cfg, None):
        if step is None:
            return
        yield step.family
