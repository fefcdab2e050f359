import numpy as np
import pytest

from mmrsafi.core import Rng
from mmrsafi.linops import (ConvStage, FilterBank, dense_matrix_of,
                            difference_bank)
from mmrsafi.oracle import admm_prox_oracle, finite_diff_gradient
from mmrsafi.prox import (ConstraintSet, ProxConfig, WeightedAnalysisOperator,
                          dual_gradient, prox_weighted_l1)

TIGHT = ProxConfig(max_iters=20000, epsilon=1e-13)


def identity_operator(shape):
    kern = np.ones((1, 1, 1, 1))
    bank = FilterBank([ConvStage(kern, 1)])
    return WeightedAnalysisOperator(bank, np.ones((1,) + shape))


def weighted_difference(rng, shape):
    return WeightedAnalysisOperator(difference_bank(),
                                    rng.uniform_array((2,) + shape))


def dual_function(L, X, z):
    """min_w-in-X 0.5*||w - z||^2 + <u, L w>; gradient is L Proj_X(z - L^T u)."""
    def fun(u):
        w = X.project(z - L.adjoint(u))
        return 0.5 * np.sum((w - z) ** 2) + np.sum(u * L.forward(w))
    return fun


def test_projection_cases():
    z = Rng(0).gaussian_array((3, 3))
    assert np.array_equal(ConstraintSet.all_space().project(z), z)
    boxed = ConstraintSet.box(0.0, 1.0).project(z + 1.7)
    assert np.max(boxed) <= 1.0 and np.min(boxed) >= 0.0
    with pytest.raises(ValueError):
        ConstraintSet.box(1.0, -1.0)


def test_projection_is_cw_minimizer():
    rng = Rng(1)
    X = ConstraintSet.box(0.0, 1.0)
    z = 3.0 * rng.gaussian_array((4, 4))
    proj = X.project(z)
    ref = np.minimum(np.maximum(z, 0.0), 1.0)
    assert np.array_equal(proj, ref)


def test_dual_gradient_closed_forms():
    rng = Rng(2)
    L = weighted_difference(rng, (5, 5))
    z = rng.gaussian_array((5, 5))
    g = dual_gradient(L, ConstraintSet.all_space(), z,
                      np.zeros((2, 5, 5)))
    assert np.allclose(g, L.forward(z))
    g0 = dual_gradient(L, ConstraintSet.box(0.0, 0.0), np.zeros((5, 5)),
                       rng.gaussian_array((2, 5, 5)))
    assert np.max(np.abs(g0)) < 1e-14


@pytest.mark.parametrize("box", [False, True])
def test_dual_gradient_matches_finite_differences(box):
    rng = Rng(3)
    X = ConstraintSet.box(0.0, 1.0) if box else ConstraintSet.all_space()
    for _ in range(10):
        L = weighted_difference(rng, (4, 4))
        z = rng.gaussian_array((4, 4))
        u = 0.5 * rng.gaussian_array((2, 4, 4))
        grad = dual_gradient(L, X, z, u)
        fd = finite_diff_gradient(dual_function(L, X, z), u)
        assert np.linalg.norm(grad - fd) <= 1e-6 * (1 + np.linalg.norm(grad))


def test_soft_threshold_closed_form():
    L = identity_operator((1, 3))
    z = np.array([[2.0, -0.5, 0.3]])
    res = prox_weighted_l1(z, L, 1.0, ConstraintSet.all_space(), TIGHT)
    assert np.max(np.abs(res.x - np.array([[1.0, 0.0, 0.0]]))) < 1e-10
    assert res.converged


def test_soft_threshold_sweep():
    rng = Rng(5)
    L = identity_operator((1, 40))
    for _ in range(25):
        z = rng.gaussian_array((1, 40))
        gamma = 0.05 + rng.uniform()
        res = prox_weighted_l1(z, L, gamma, ConstraintSet.all_space(), TIGHT)
        expect = np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)
        assert np.max(np.abs(res.x - expect)) < 1e-10


def test_vanishing_gamma_returns_projection():
    rng = Rng(6)
    L = weighted_difference(rng, (6, 6))
    z = rng.gaussian_array((6, 6))
    res = prox_weighted_l1(z, L, 1e-12, ConstraintSet.box(0.0, 1.0), TIGHT)
    assert np.max(np.abs(res.x - np.clip(z, 0, 1))) < 1e-8


def test_dual_feasible_and_in_constraint():
    rng = Rng(7)
    L = weighted_difference(rng, (6, 6))
    z = rng.gaussian_array((6, 6))
    X = ConstraintSet.box(0.0, 1.0)
    res = prox_weighted_l1(z, L, 0.3, X, TIGHT)
    assert np.max(np.abs(res.dual)) <= 0.3
    assert np.min(res.x) >= 0.0 and np.max(res.x) <= 1.0


def test_firm_nonexpansiveness_consequence():
    rng = Rng(8)
    L = weighted_difference(rng, (6, 6))
    X = ConstraintSet.all_space()
    for _ in range(10):
        z1 = rng.gaussian_array((6, 6))
        z2 = rng.gaussian_array((6, 6))
        p1 = prox_weighted_l1(z1, L, 0.3, X, TIGHT).x
        p2 = prox_weighted_l1(z2, L, 0.3, X, TIGHT).x
        assert (np.linalg.norm(p1 - p2)
                <= np.linalg.norm(z1 - z2) + 1e-8)


def test_matches_admm_oracle():
    rng = Rng(9)
    bank = difference_bank()
    for trial in range(10):
        z = rng.gaussian_array((6, 6))
        L = WeightedAnalysisOperator(bank, rng.uniform_array((2, 6, 6)))
        gamma = (0.05, 0.3, 1.0)[trial % 3]
        X = (ConstraintSet.all_space(),
             ConstraintSet.box(0.0, 1.0))[trial % 2]
        res = prox_weighted_l1(z, L, gamma, X, TIGHT)
        ref = admm_prox_oracle(z, dense_matrix_of(L.forward, (6, 6)), gamma, X)
        assert np.max(np.abs(res.x.ravel() - ref)) < 1e-6


def test_objective_close_to_oracle_optimum():
    rng = Rng(10)
    L = weighted_difference(rng, (6, 6))
    z = rng.gaussian_array((6, 6))
    X = ConstraintSet.all_space()

    def objective(x):
        return 0.5 * np.sum((x - z) ** 2) + 0.3 * np.sum(np.abs(L.forward(x)))

    res = prox_weighted_l1(z, L, 0.3, X, TIGHT)
    ref = admm_prox_oracle(z, dense_matrix_of(L.forward, (6, 6)), 0.3, X)
    assert objective(res.x) <= objective(ref.reshape(6, 6)) + 1e-6


def test_warm_start_converges_faster():
    rng = Rng(11)
    L = weighted_difference(rng, (6, 6))
    z = rng.gaussian_array((6, 6))
    X = ConstraintSet.all_space()
    cold = prox_weighted_l1(z, L, 0.3, X, TIGHT)
    warm = prox_weighted_l1(z, L, 0.3, X, TIGHT, warm_u=cold.dual)
    assert warm.iterations <= cold.iterations
    assert np.max(np.abs(warm.x - cold.x)) < 1e-8


def test_zero_mask_returns_projection():
    bank = difference_bank()
    L = WeightedAnalysisOperator(bank, np.zeros((2, 4, 4)))
    z = Rng(12).gaussian_array((4, 4))
    res = prox_weighted_l1(z, L, 0.5, ConstraintSet.box(0.0, 1.0), TIGHT)
    assert np.array_equal(res.x, np.clip(z, 0, 1))


def test_budget_exhaustion_flagged():
    rng = Rng(13)
    L = weighted_difference(rng, (6, 6))
    z = rng.gaussian_array((6, 6))
    res = prox_weighted_l1(z, L, 0.3, ConstraintSet.all_space(),
                           ProxConfig(max_iters=2, epsilon=1e-16))
    assert not res.converged and res.iterations == 2


def test_nonfinite_input_rejected():
    L = identity_operator((1, 3))
    with pytest.raises(ValueError):
        prox_weighted_l1(np.array([[np.nan, 0.0, 0.0]]), L, 1.0,
                         ConstraintSet.all_space(), TIGHT)
    with pytest.raises(ValueError):
        prox_weighted_l1(np.zeros((1, 3)), L, 0.0,
                         ConstraintSet.all_space(), TIGHT)
