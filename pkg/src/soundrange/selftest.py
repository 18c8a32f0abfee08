"""Quick randomized invariant checks, runnable without pytest (``soundrange selftest``)."""
from __future__ import annotations

import math

import numpy as np

from .cover import ball, contains, max_ball_children, subdivide
from .problem import DefectKind, SrpInstance, ball_test, defect
from .space import LpSpace, distance

EXPONENTS = (1.0, 2.0, 3.5, 5.6789)


def _instances(rng, count=20):
    for p in EXPONENTS:
        for _ in range(count):
            m = int(rng.integers(1, 4))
            space = LpSpace(m, p)
            sensors = rng.uniform(-5, 5, size=(int(rng.integers(2, 9)), m))
            source = rng.uniform(-5, 5, size=m)
            yield SrpInstance.from_truth(space, sensors, source, float(rng.uniform(-3, 3)))


def check_lipschitz(rng) -> bool:
    for inst in _instances(rng):
        x, y = rng.uniform(-8, 8, size=(2, inst.space.dim))
        rho = distance(inst.space, x, y)
        for kind in DefectKind:
            i = inst.with_defect(kind)
            if abs(defect(i, x) - defect(i, y)) > 2 * rho + 1e-12:
                return False
    return True


def check_domination_and_zero(rng) -> bool:
    for inst in _instances(rng):
        x = rng.uniform(-8, 8, size=inst.space.dim)
        if defect(inst.with_defect("sum"), x) > defect(inst, x) + 1e-12:
            return False
        if defect(inst, inst.truth.source) > 1e-12 or defect(inst.with_defect("sum"), inst.truth.source) > 1e-12:
            return False
    return True


def check_ball_test(rng) -> bool:
    for inst in _instances(rng):
        s = inst.truth.source
        r = float(rng.uniform(0.01, 3))
        direction = rng.normal(size=inst.space.dim)
        c = s + direction / max(distance(inst.space, direction, 0 * direction), 1e-300) * r * rng.uniform(0, 1)
        if not ball_test(inst, c, r):
            return False
    return True


def check_subdivision(rng) -> bool:
    for p in EXPONENTS:
        for m in (1, 2, 3):
            space = LpSpace(m, p)
            parent = ball(space, rng.uniform(-3, 3, size=m), float(rng.uniform(0.1, 2)))
            kids = subdivide(parent)
            if len(kids) > max_ball_children(space):
                return False
            if not all(contains(parent, k.anchor) and k.size == parent.size / 2 for k in kids):
                return False
            anchors = np.stack([k.anchor for k in kids])
            pts = rng.normal(size=(200, m))
            pts /= (np.abs(pts) ** p).sum(axis=1, keepdims=True) ** (1 / p)
            pts = parent.anchor + pts * parent.size * rng.uniform(0, 1, size=(200, 1)) ** (1 / m)
            d = (np.abs(pts[:, None, :] - anchors[None]) ** p).sum(axis=2) ** (1 / p)
            if np.any(d.min(axis=1) > parent.size / 2 + 1e-12):
                return False
    return True


def check_non_sdn_decay(rng) -> bool:
    N = 100
    space = LpSpace(N, 2.0)
    eye = np.eye(N)
    inst = SrpInstance.from_truth(space, np.vstack([eye, -eye]), np.zeros(N))
    for n in (1, 4, 25, 100):
        x = np.zeros(N)
        x[:n] = 1 / math.sqrt(n)
        want = math.sqrt(2 + 2 / math.sqrt(n)) - math.sqrt(2 - 2 / math.sqrt(n))
        if abs(defect(inst, x) - want) > 1e-9:
            return False
    return True


CHECKS = {
    "defect lipschitz": check_lipschitz,
    "defect domination and zero at source": check_domination_and_zero,
    "ball test never excludes the source": check_ball_test,
    "half-size subdivision covers": check_subdivision,
    "non-sdn decay fixture": check_non_sdn_decay,
}


def run_selftest(seed: int = 0, out=print) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, check in CHECKS.items():
        passed = check(rng)
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
