import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soundrange.errors import ContractError
from soundrange.problem import (
    DefectKind,
    SrpInstance,
    backward_moment,
    ball_test,
    defect,
    defect_sum,
    defect_sup,
    exclusion_by_witness,
    is_solution,
)
from soundrange.space import LpSpace, distance


def test_backward_moments_f1(f1):
    assert backward_moment(f1, 0, [0.5]) == pytest.approx(0.0, abs=1e-12)
    assert backward_moment(f1, 0, [0.0]) == pytest.approx(0.5, abs=1e-12)
    assert backward_moment(f1, 1, [0.0]) == pytest.approx(-0.5, abs=1e-12)
    with pytest.raises(IndexError):
        backward_moment(f1, 2, [0.0])


def test_moment_at_source_is_emit_time():
    sp = LpSpace(3, 3.5)
    inst = SrpInstance.from_truth(sp, np.eye(3), [0.2, -0.4, 1.0], emit_time=2.5)
    for i in range(3):
        assert backward_moment(inst, i, inst.truth.source) == pytest.approx(2.5, abs=1e-12)


def test_defect_sup_examples(f1):
    assert defect_sup(f1, [0.0]) == pytest.approx(1.0, abs=1e-12)
    assert defect_sup(f1, [0.5]) == pytest.approx(0.0, abs=1e-12)
    inst = SrpInstance.from_truth(LpSpace(2, 2), [[0, 0], [1, 0], [0, 1]], [0, 0])
    assert defect_sup(inst, [1, 1]) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_defect_sum_examples(f1):
    assert defect_sum(f1, [0.0]) == pytest.approx(0.5, abs=1e-12)
    assert defect_sum(f1, [0.5]) == pytest.approx(0.0, abs=1e-12)


def test_defect_dispatch(f1):
    assert defect(f1.with_defect(DefectKind.SUP), [0.0]) == pytest.approx(1.0, abs=1e-12)
    assert defect(f1.with_defect("sum"), [0.0]) == pytest.approx(0.5, abs=1e-12)
    for kind in DefectKind:
        assert defect(f1.with_defect(kind), [0.5]) == pytest.approx(0.0, abs=1e-12)


def test_ball_test_examples(f1):
    assert ball_test(f1, [0.0], 0.6)
    assert not ball_test(f1, [0.0], 0.4)
    assert ball_test(f1, [0.5], 1e-9)
    with pytest.raises(ContractError):
        ball_test(f1, [0.0], 0.0)


def test_exclusion_by_witness_examples(f1):
    assert exclusion_by_witness(f1, [0.0], [0.05], 0.2)
    assert distance(f1.space, [0.5], [0.05]) > 0.2
    assert not exclusion_by_witness(f1, [0.0], [0.1], 0.3)
    assert not exclusion_by_witness(f1, [0.5], [0.5], 0.1)
    with pytest.raises(ContractError):
        exclusion_by_witness(f1, [0.0], [1.0], 0.3)


def test_is_solution_examples(f1):
    assert is_solution(f1, [0.5], 1e-9)
    assert not is_solution(f1, [0.0], 1e-9)
    assert is_solution(f1, [0.5 + 1e-12], 1e-9)


def test_instance_validation():
    sp = LpSpace(2, 2)
    with pytest.raises(ContractError):
        SrpInstance(sp, np.empty((0, 2)), [])
    with pytest.raises(ContractError):
        SrpInstance(sp, [[0, 0], [1, 1]], [0.0])
    with pytest.raises(ContractError):
        SrpInstance(sp, [[0, 0], [1, 1]], [0.0, 1.0], weights=[0.5, 0.6])
    with pytest.raises(ContractError):
        SrpInstance(sp, [[0, 0], [1, 1]], [0.0, 1.0], weights=[1.0, 0.0])
    inst = SrpInstance(sp, [[0, 0], [1, 1]], [0.0, 1.0])
    np.testing.assert_allclose(inst.weights, [0.5, 0.5])
    with pytest.raises(ValueError):
        inst.sensors[0, 0] = 3.0


def test_truncated_countable_weights():
    # p_i = 2^-i truncated to n terms and renormalised
    n = 6
    w = 2.0 ** -np.arange(1, n + 1)
    w /= w.sum()
    sp = LpSpace(2, 2)
    inst = SrpInstance.from_truth(sp, np.random.default_rng(0).uniform(-1, 1, (n, 2)), [0.1, 0.2], weights=w, defect_kind="sum")
    assert defect(inst, [0.1, 0.2]) <= 1e-12
    assert defect(inst, [0.5, 0.5]) <= defect(inst.with_defect("sup"), [0.5, 0.5])


@st.composite
def instances(draw):
    m = draw(st.integers(1, 3))
    p = draw(st.sampled_from([1.0, 2.0, 3.5, 5.6789]))
    n = draw(st.integers(1, 8))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.1, 1.0, n)
    inst = SrpInstance.from_truth(
        LpSpace(m, p), rng.uniform(-5, 5, (n, m)), rng.uniform(-5, 5, m), float(rng.uniform(-3, 3)),
        weights=raw / raw.sum(),
    )
    return inst, rng


@settings(max_examples=200, deadline=None)
@given(case=instances())
def test_lipschitz_domination_and_zero(case):
    inst, rng = case
    x, y = rng.uniform(-8, 8, (2, inst.space.dim))
    rho = distance(inst.space, x, y)
    sup, avg = inst.with_defect("sup"), inst.with_defect("sum")
    for i in (sup, avg):
        assert abs(defect(i, x) - defect(i, y)) <= 2 * rho + 1e-12
        assert defect(i, inst.truth.source) <= 1e-12
    assert defect(avg, x) <= defect(sup, x) + 1e-12


@settings(max_examples=200, deadline=None)
@given(case=instances(), frac=st.floats(0, 1), r=st.floats(1e-6, 10))
def test_ball_test_never_drops_the_source(case, frac, r):
    inst, rng = case
    v = rng.normal(size=inst.space.dim)
    v /= distance(inst.space, v, np.zeros_like(v))
    c = inst.truth.source + frac * r * v
    for kind in DefectKind:
        assert ball_test(inst.with_defect(kind), c, r)


def test_vectorised_defect_matches_scalar(rng):
    inst = SrpInstance.from_truth(LpSpace(2, 5.6789), rng.uniform(-10, 10, (64, 2)), [1.0, 2.0])
    xs = rng.uniform(-10, 10, (50, 2))
    for kind in DefectKind:
        i = inst.with_defect(kind)
        np.testing.assert_allclose(i.defect_many(xs), [defect(i, x) for x in xs], atol=1e-12)


NON_SDN_CLOSED_FORM = {
    1: 2.0,
    4: 0.7320508075688773,
    25: 0.28428227441561502,
    100: 0.14159891091925877,
}


@pytest.mark.parametrize("n", sorted(NON_SDN_CLOSED_FORM))
def test_non_sdn_decay_fixture(n):
    N = 100
    eye = np.eye(N)
    inst = SrpInstance.from_truth(LpSpace(N, 2.0), np.vstack([eye, -eye]), np.zeros(N), 0.0)
    x = np.zeros(N)
    x[:n] = 1.0 / math.sqrt(n)
    assert defect_sup(inst, x) == pytest.approx(NON_SDN_CLOSED_FORM[n], abs=1e-9)
    # x_n sits on the unit sphere, yet its defect shrinks
    assert distance(inst.space, x, np.zeros(N)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", list(DefectKind))
def test_grid_argmin_is_near_source_1d(f1, kind):
    inst = f1.with_defect(kind)
    grid = np.linspace(-1, 2, 3001)
    d = inst.defect_many(grid[:, None])
    # in R^1 between two sensors the defect is flat zero only at s
    assert abs(grid[np.argmin(d)] - 0.5) <= grid[1] - grid[0]


def test_grid_argmin_is_near_source_2d(rng):
    sp = LpSpace(2, 3.5)
    inst = SrpInstance.from_truth(sp, rng.uniform(-5, 5, (8, 2)), [1.234, -0.567])
    g = np.linspace(-5, 5, 501)
    X, Y = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    best = pts[np.argmin(inst.defect_many(pts))]
    assert np.max(np.abs(best - inst.truth.source)) <= g[1] - g[0]
