"""Optimizers: quadratic and Rosenbrock oracles, line-search contracts."""

import numpy as np
import pytest

from rwpinn.optimize import OptimizerConfig, adam, lbfgs_minimize, strong_wolfe


def quadratic(A, b):
    def f(x):
        return 0.5 * float(x @ A @ x) - float(b @ x), A @ x - b

    return f


def rosenbrock(x):
    a, c = 1.0, 100.0
    val = (a - x[0]) ** 2 + c * (x[1] - x[0] ** 2) ** 2
    grad = np.array(
        [
            -2 * (a - x[0]) - 4 * c * x[0] * (x[1] - x[0] ** 2),
            2 * c * (x[1] - x[0] ** 2),
        ]
    )
    return float(val), grad


def test_lbfgs_quadratic_converges():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(12, 12))
    A = M @ M.T + 12 * np.eye(12)
    b = rng.normal(size=12)
    result = lbfgs_minimize(
        quadratic(A, b), np.zeros(12), OptimizerConfig(grad_tol=1e-7)
    )
    assert result.status == "converged"
    np.testing.assert_allclose(result.x, np.linalg.solve(A, b), atol=1e-7)
    assert result.grad_norm <= 1e-7


def test_lbfgs_rosenbrock():
    result = lbfgs_minimize(
        rosenbrock, np.array([-1.2, 1.0]), OptimizerConfig(max_iterations=500)
    )
    np.testing.assert_allclose(result.x, [1.0, 1.0], atol=1e-6)
    assert result.value <= 1e-12


def test_lbfgs_history_monotone():
    result = lbfgs_minimize(
        rosenbrock, np.array([-1.2, 1.0]), OptimizerConfig(max_iterations=200)
    )
    hist = np.asarray(result.history)
    assert np.all(np.diff(hist) <= 1e-14)


def test_lbfgs_zero_iterations_at_optimum():
    A = np.eye(3)
    b = np.zeros(3)
    result = lbfgs_minimize(quadratic(A, b), np.zeros(3), OptimizerConfig())
    assert result.iterations == 0
    assert result.status == "converged"


def test_lbfgs_respects_iteration_cap():
    result = lbfgs_minimize(
        rosenbrock, np.array([-1.2, 1.0]), OptimizerConfig(max_iterations=3)
    )
    assert result.iterations <= 3
    assert result.status in ("max_iterations", "converged")


def test_strong_wolfe_conditions_hold():
    f = quadratic(np.diag([1.0, 10.0]), np.zeros(2))
    x = np.array([4.0, 1.0])
    f0, g0 = f(x)
    d = -g0
    c1, c2 = 1e-4, 0.9
    out = strong_wolfe(lambda z: f(z), x, f0, g0, d, c1, c2)
    assert out is not None
    alpha, f_new, g_new, _ = out
    dg0 = g0 @ d
    assert f_new <= f0 + c1 * alpha * dg0  # sufficient decrease
    assert abs(g_new @ d) <= -c2 * dg0  # curvature


def test_strong_wolfe_rejects_ascent_direction():
    f = quadratic(np.eye(2), np.zeros(2))
    x = np.array([1.0, 1.0])
    f0, g0 = f(x)
    assert strong_wolfe(lambda z: f(z), x, f0, g0, g0, 1e-4, 0.9) is None


def test_adam_descends_quadratic():
    f = quadratic(np.eye(4), np.zeros(4))
    x, hist = adam(f, np.ones(4), steps=300, lr=1e-2)
    assert f(x)[0] < hist[0]
    assert float(np.linalg.norm(x)) < 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(c1=0.5, c2=0.1)
    with pytest.raises(ValueError):
        OptimizerConfig(memory=0)
    with pytest.raises(ValueError):
        OptimizerConfig(max_iterations=-1)
