import math

import numpy as np
import pytest

import soundrange.rc as rc_mod
from soundrange.cover import ball
from soundrange.errors import ContractError, NoSurvivorsError
from soundrange.problem import SrpInstance, defect
from soundrange.rc import Halt, RcConfig, rc_families, rc_sequence, rc_solve
from soundrange.space import LpSpace, distance, distances


def grid_argmin(inst, lo, hi, n):
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    d = inst.defect_many(pts)
    return pts[np.argmin(d)], max((b - a) / (n - 1) for a, b in zip(lo, hi))


def test_f1_solve(f1):
    target, step = grid_argmin(f1, [-1.0], [2.0], 30001)
    assert abs(target[0] - 0.5) <= step
    cfg = RcConfig(1e-3, ball(f1.space, [0.5], 1.5))
    rep = rc_solve(f1, cfg)
    assert rep.halt is Halt.PRECISION_REACHED
    assert rep.levels[-1].spread < 1e-3
    assert distance(f1.space, rep.approx, target) < 1e-3 + step
    assert abs(rep.approx[0] - 0.5) < 1e-3


def test_f1_off_centre_initial(f1):
    rep = rc_solve(f1, RcConfig(1e-4, ball(f1.space, [0.2], 1.0)))
    assert rep.halt is Halt.PRECISION_REACHED
    assert abs(rep.approx[0] - 0.5) < 1e-4


def test_degenerate_initial_halts_at_level_one(f1):
    cfg = RcConfig(0.51, ball(f1.space, [0.5], 0.25))
    rep = rc_solve(f1, cfg)
    assert rep.halt is Halt.PRECISION_REACHED
    assert len(rep.levels) == 1
    assert abs(rep.approx[0] - 0.5) < 0.51


def test_appendix_shaped_instance(rng):
    sp = LpSpace(2, 5.6789)
    s = rng.uniform(-10, 10, 2)
    inst = SrpInstance.from_truth(sp, rng.uniform(-10, 10, (64, 2)), s)
    r0 = 10 * 2 ** (1 / sp.p)
    rep = rc_solve(inst, RcConfig(0.1, ball(sp, (0, 0), r0)))
    assert rep.halt is Halt.PRECISION_REACHED
    assert distance(sp, rep.approx, s) < 0.1
    assert [rec.level for rec in rep.levels] == list(range(1, len(rep.levels) + 1))
    radii = [rec.radius for rec in rep.levels]
    assert all(b == a / 2 for a, b in zip(radii, radii[1:]))


def test_sequence_survivor_bound_and_progress(f1):
    cfg = RcConfig(1e-9, ball(f1.space, [0.5], 1.5), max_level=20)
    pivots = list(rc_sequence(f1, cfg))
    assert len(pivots) == 20
    for k, c in enumerate(pivots, start=1):
        assert defect(f1, c) <= 2 * 1.5 / 2**k + 1e-12
    assert abs(pivots[19][0] - 0.5) <= abs(pivots[4][0] - 0.5)


def test_sequence_reaches_source_in_plane():
    sp = LpSpace(2, 2.0)
    s = np.array([0.25, 0.25])
    inst = SrpInstance.from_truth(sp, [[0, 0], [1, 0], [0, 1]], s)
    init = ball(sp, s + 0.1, 0.5)
    # brute force: the only near-zero of D within the initial ball is s
    g = np.linspace(-0.5, 1.0, 601)
    pts = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    pts = pts[distances(sp, pts, init.anchor) <= 2 * init.size]
    near_zero = pts[inst.defect_many(pts) < 0.01]
    assert distances(sp, near_zero, s).max() < 0.02
    pivots = list(rc_sequence(inst, RcConfig(1e-9, init, max_level=30)))
    assert any(distance(sp, c, s) < 0.01 for c in pivots)
    assert distance(sp, pivots[-1], s) < 1e-6


# l1 zero sets of the defect can have area, so the family grows there; stay shallow
@pytest.mark.parametrize("p,levels", [(1.0, 6), (2.0, 18), (5.6789, 14)])
def test_source_always_in_a_survivor(rng, p, levels):
    sp = LpSpace(2, p)
    s = rng.uniform(-3, 3, 2)
    inst = SrpInstance.from_truth(sp, rng.uniform(-4, 4, (6, 2)), s)
    cfg = RcConfig(1e-6, ball(sp, (0, 0), 3 * 2 ** (1 / p) + 0.01), max_level=levels)
    for fam in rc_families(inst, cfg):
        d = distances(sp, fam.anchors, s)
        assert d.min() <= fam.radius
        assert np.all(inst.defect_many(fam.anchors) <= 2 * fam.radius + 1e-12)


def test_halting_level_bound_on_f1(f1):
    c, r0, delta = 0.5, 1.5, 1e-3
    # SDN constant for precision delta/4 on F_inf within B[c; 2 r0], by grid search
    g = np.linspace(c - 2 * r0, c + 2 * r0, 600001)
    far = g[np.abs(g - 0.5) >= delta / 4]
    eps = f1.defect_many(far[:, None]).min()
    assert eps == pytest.approx(delta / 2, rel=1e-3)
    bound = max(1, math.ceil(math.log2(2 * r0 / delta)), math.floor(math.log2(2 * r0 / eps)) + 1)
    rep = rc_solve(f1, RcConfig(delta, ball(f1.space, [c], r0)))
    assert rep.halt is Halt.PRECISION_REACHED
    assert len(rep.levels) <= bound


def test_family_overflow(rng):
    sp = LpSpace(2, 2)
    inst = SrpInstance.from_truth(sp, rng.uniform(-1, 1, (5, 2)), (0.1, 0.2))
    rep = rc_solve(inst, RcConfig(1e-6, ball(sp, (0, 0), 2.0), max_family=3))
    assert rep.halt is Halt.FAMILY_OVERFLOW


def test_budget_exhausted(f1):
    rep = rc_solve(f1, RcConfig(1e-9, ball(f1.space, [0.5], 1.5), max_level=5))
    assert rep.halt is Halt.BUDGET_EXHAUSTED
    assert len(rep.levels) == 5


def test_no_survivors_when_initial_misses_source(f1):
    with pytest.raises(NoSurvivorsError):
        rc_solve(f1, RcConfig(1e-6, ball(f1.space, [5.0], 0.5)))


def test_config_validation(f1):
    with pytest.raises(ContractError):
        RcConfig(0.0, ball(f1.space, [0.5], 1.0))
    with pytest.raises(ContractError):
        RcConfig(0.1, ball(f1.space, [0.5], 1.0), max_level=0)


def test_sink_receives_each_level(f1):
    seen = []
    rep = rc_solve(f1, RcConfig(1e-3, ball(f1.space, [0.5], 1.5)), sink=seen.append)
    assert seen == rep.levels


def test_defect_kind_override(f1):
    rep = rc_solve(f1, RcConfig(1e-3, ball(f1.space, [0.5], 1.5), defect_kind="sum"))
    assert abs(rep.approx[0] - 0.5) < 1e-3


def test_witness_pruning_changes_nothing(rng):
    sp = LpSpace(2, 3.5)
    inst = SrpInstance.from_truth(sp, rng.uniform(-10, 10, (16, 2)), rng.uniform(-9, 9, 2))
    init = ball(sp, (0, 0), 10 * 2 ** (1 / 3.5))
    plain = rc_solve(inst, RcConfig(1e-3, init))
    pruned = rc_solve(inst, RcConfig(1e-3, init, witness_pruning=True))
    assert plain.levels == pruned.levels
    np.testing.assert_array_equal(plain.approx, pruned.approx)


def test_worker_count_does_not_change_results(rng, monkeypatch):
    monkeypatch.setattr(rc_mod, "PARALLEL_MIN", 1)
    sp = LpSpace(3, 5.6789)
    inst = SrpInstance.from_truth(sp, rng.uniform(-10, 10, (32, 3)), rng.uniform(-9, 9, 3))
    init = ball(sp, (0, 0, 0), 10 * 3 ** (1 / sp.p))
    runs = [rc_solve(inst, RcConfig(0.05, init, workers=w)) for w in (1, 3, 8)]
    for other in runs[1:]:
        assert other.levels == runs[0].levels
        assert other.approx.tobytes() == runs[0].approx.tobytes()
