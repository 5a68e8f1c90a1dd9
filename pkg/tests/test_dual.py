import numpy as np
import pytest

from psvm.dual import (Hyperparams, derive_gamma_theta, dual_objective, is_feasible,
                       primal_objective, w_norm_sq_from_dual)
from psvm.exceptions import InvalidInputError
from psvm.kernels import Kernel, kernel_matrix


def test_derive_gamma_theta_values():
    assert derive_gamma_theta(2.0, 1.0) == (2.0, 0.25)
    g, t = derive_gamma_theta(1.5, 1.0)
    assert g == 3.0
    assert t == pytest.approx(4.0 / 27.0, abs=1e-15)
    assert derive_gamma_theta(2.0, 0.25) == (2.0, 1.0)


def test_derive_gamma_theta_rejects_p_at_most_one():
    with pytest.raises(InvalidInputError):
        derive_gamma_theta(1.0, 1.0)
    with pytest.raises(InvalidInputError):
        derive_gamma_theta(0.9, 1.0)


def test_derive_gamma_theta_overflow():
    # gamma ~ 10001 and C < 1 pushes C^(1-gamma) past the float range
    with pytest.raises(InvalidInputError):
        derive_gamma_theta(1.0001, 0.5)


def test_theta_shrinks_toward_classic_model():
    prev = derive_gamma_theta(1.1, 1.0)[1]
    for p in (1.01, 1.001):
        theta = derive_gamma_theta(p, 1.0)[1]
        assert 0.0 < theta < prev
        prev = theta


def test_hyperparams_derivation_and_p1_mode():
    hp = Hyperparams(p=2.0, C=1.0)
    assert (hp.gamma, hp.theta) == (2.0, 0.25)
    hp1 = Hyperparams(p=1.0, C=5.0)
    assert hp1.hard_margin and hp1.gamma is None and hp1.theta is None
    with pytest.raises(InvalidInputError):
        Hyperparams(p=1.0, C=1.0, gamma=2.0, theta=0.0)
    with pytest.raises(InvalidInputError):
        Hyperparams(p=2.0, C=-1.0)


RUNNING_X = np.array([[1.0, 0.0], [-1.0, 0.0]])
RUNNING_Y = np.array([1.0, -1.0])


def test_dual_objective_zero_alpha():
    K = kernel_matrix(Kernel("linear"), RUNNING_X)
    hp = Hyperparams(p=2.0, C=1.0)
    assert dual_objective(np.zeros(2), RUNNING_Y, K, hp) == 0.0


def test_dual_objective_running_example():
    # objective reduces to 2a - 2.5a^2 on the feasible line; at a = 0.4 it is 0.4
    K = kernel_matrix(Kernel("linear"), RUNNING_X)
    hp = Hyperparams(p=2.0, C=1.0)
    val = dual_objective(np.array([0.4, 0.4]), RUNNING_Y, K, hp)
    assert val == pytest.approx(2 * 0.4 - 2.5 * 0.16, abs=1e-12)


def test_dual_objective_rejects_negative_alpha():
    K = np.eye(2)
    hp = Hyperparams(p=2.0, C=1.0)
    with pytest.raises(InvalidInputError):
        dual_objective(np.array([-0.1, 0.1]), RUNNING_Y, K, hp)


def test_theta_zero_matches_classic_objective_bitwise():
    rng = np.random.default_rng(0)
    hp0 = Hyperparams(p=2.0, C=1.0, gamma=2.0, theta=0.0)
    for _ in range(50):
        m = int(rng.integers(2, 20))
        X = rng.normal(size=(m, 3))
        y = np.where(rng.random(m) < 0.5, 1.0, -1.0)
        alpha = rng.uniform(0.0, 2.0, m)
        K = kernel_matrix(Kernel("linear"), X)
        ours = dual_objective(alpha, y, K, hp0)
        v = alpha * y
        classic = float(np.sum(alpha)) - 0.5 * float(v @ (K @ v))
        assert ours == classic  # identical arithmetic path


def test_dual_objective_concavity_probe():
    rng = np.random.default_rng(1)
    for p in (1.5, 2.0, 2.5):
        hp = Hyperparams(p=p, C=1.0)
        m = 12
        X = rng.normal(size=(m, 4))
        y = np.where(rng.random(m) < 0.5, 1.0, -1.0)
        K = kernel_matrix(Kernel("gaussian", sigma=1.0), X)
        for _ in range(60):
            a1 = rng.uniform(0.0, 2.0, m)
            a2 = rng.uniform(0.0, 2.0, m)
            t = float(rng.random())
            mix = dual_objective(t * a1 + (1 - t) * a2, y, K, hp)
            lin = t * dual_objective(a1, y, K, hp) + (1 - t) * dual_objective(a2, y, K, hp)
            assert mix >= lin - 1e-9


def test_is_feasible():
    y = np.array([1.0, -1.0])
    assert is_feasible(np.zeros(2), y)
    assert is_feasible(np.array([1.0, 1.0]), y)
    assert not is_feasible(np.array([1.0, 1.0]), np.array([1.0, 1.0]), tol=1e-9)
    assert not is_feasible(np.array([-1e-6, 1e-6]), y, tol=1e-9)


def test_is_feasible_default_tolerance_scales():
    y = np.array([1.0, -1.0])
    # |sum alpha_i y_i| = 5 but the default tolerance is 1e-8 * 2e9 = 20
    assert is_feasible(np.array([1e9, 1e9 + 5.0]), y)
    # at unit scale the same absolute violation fails
    assert not is_feasible(np.array([1.0, 1.0 + 5e-8]), y)


def test_primal_objective():
    hp1 = Hyperparams(p=1.0, C=1.0)
    assert primal_objective(0.0, np.zeros(5), hp1) == 5.0
    hp2 = Hyperparams(p=2.0, C=2.0)
    assert primal_objective(2.0, [0.5], hp2) == pytest.approx(1.5, abs=1e-15)
    assert primal_objective(3.0, [1.2, 2.0], hp2) == 1.5  # separable: hinge vanishes


def test_weak_duality_on_running_example():
    # primal at the dual-feasible point dominates the dual value
    K = kernel_matrix(Kernel("linear"), RUNNING_X)
    hp = Hyperparams(p=2.0, C=1.0)
    alpha = np.array([0.4, 0.4])
    dual = dual_objective(alpha, RUNNING_Y, K, hp)
    w_sq = w_norm_sq_from_dual(alpha, RUNNING_Y, K)
    margins = RUNNING_Y * (K @ (alpha * RUNNING_Y))  # b = 0
    primal = primal_objective(w_sq, margins, hp)
    assert primal >= dual - 1e-12
