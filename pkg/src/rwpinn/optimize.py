"""First- and second-order optimizers over flat parameter vectors.

The objective callable returns (value, gradient). L-BFGS uses the two-loop
recursion with a strong-Wolfe line search; accepted steps are monotone
nonincreasing in the objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class OptimizerConfig:
    adam_steps: int = 500
    adam_lr: float = 1e-3
    max_iterations: int = 5000
    memory: int = 10
    c1: float = 1e-4
    c2: float = 0.9
    grad_tol: float = 1e-9
    max_line_search: int = 25

    def __post_init__(self):
        if not 0.0 < self.c1 < self.c2 < 1.0:
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.max_iterations < 0 or self.memory < 1:
            raise ValueError("invalid optimizer limits")


@dataclass
class OptimizeResult:
    x: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    status: str  # "converged" | "max_iterations" | "line_search_failure"
    history: list = field(default_factory=list)


def adam(objective, x0, steps, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Plain Adam warm-up; returns the final iterate and loss history."""
    x = np.asarray(x0, dtype=np.float64).copy()
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    history = []
    for k in range(1, steps + 1):
        val, g = objective(x)
        history.append(val)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        mhat = m / (1.0 - beta1**k)
        vhat = v / (1.0 - beta2**k)
        x -= lr * mhat / (np.sqrt(vhat) + eps)
    return x, history


def _cubic_step(a, fa, ga, b, fb, gb):
    # minimizer of the cubic interpolant on [a, b]; falls back to bisection
    d1 = ga + gb - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - ga * gb
    if disc < 0.0:
        return 0.5 * (a + b)
    d2 = np.sqrt(disc) * np.sign(b - a)
    t = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2)
    lo, hi = min(a, b), max(a, b)
    if not np.isfinite(t) or t <= lo or t >= hi:
        return 0.5 * (a + b)
    return t


def strong_wolfe(objective, x, f0, g0, direction, c1, c2, max_iter=25, alpha0=1.0):
    """Strong-Wolfe line search (bracket + zoom).

    Returns (alpha, f, g, n_evals) or None on failure.
    """
    d = direction
    dg0 = float(g0 @ d)
    if dg0 >= 0.0:
        return None

    def phi(alpha):
        f, g = objective(x + alpha * d)
        return f, g, float(g @ d)

    def zoom(lo, f_lo, dg_lo, hi, f_hi, dg_hi, evals):
        for _ in range(max_iter):
            alpha = _cubic_step(lo, f_lo, dg_lo, hi, f_hi, dg_hi)
            f, g, dg = phi(alpha)
            evals += 1
            if f > f0 + c1 * alpha * dg0 or f >= f_lo:
                hi, f_hi, dg_hi = alpha, f, dg
            else:
                if abs(dg) <= -c2 * dg0:
                    return alpha, f, g, evals
                if dg * (hi - lo) >= 0.0:
                    hi, f_hi, dg_hi = lo, f_lo, dg_lo
                lo, f_lo, dg_lo = alpha, f, dg
            if abs(hi - lo) < 1e-16:
                break
        return None

    prev_alpha, prev_f, prev_dg = 0.0, f0, dg0
    alpha = alpha0
    evals = 0
    for i in range(max_iter):
        f, g, dg = phi(alpha)
        evals += 1
        if f > f0 + c1 * alpha * dg0 or (i > 0 and f >= prev_f):
            return zoom(prev_alpha, prev_f, prev_dg, alpha, f, dg, evals)
        if abs(dg) <= -c2 * dg0:
            return alpha, f, g, evals
        if dg >= 0.0:
            return zoom(alpha, f, dg, prev_alpha, prev_f, prev_dg, evals)
        prev_alpha, prev_f, prev_dg = alpha, f, dg
        alpha *= 2.0
    return None


def lbfgs_minimize(objective, x0, config: OptimizerConfig) -> OptimizeResult:
    """Limited-memory BFGS with strong-Wolfe line search."""
    x = np.asarray(x0, dtype=np.float64).copy()
    f, g = objective(x)
    history = [f]
    s_list, y_list, rho_list = [], [], []
    best_x, best_f = x.copy(), f
    status = "max_iterations"
    iterations = 0

    for it in range(config.max_iterations):
        gnorm = float(np.linalg.norm(g, np.inf))
        if gnorm <= config.grad_tol:
            status = "converged"
            break

        # two-loop recursion
        q = -g
        alphas = []
        for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        if y_list:
            y = y_list[-1]
            q *= (s_list[-1] @ y) / (y @ y)
        else:
            q /= max(1.0, float(np.linalg.norm(g)))
        for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
            b = rho * (y @ q)
            q += (a - b) * s

        ls = strong_wolfe(
            objective, x, f, g, q, config.c1, config.c2, config.max_line_search
        )
        if ls is None:
            status = "line_search_failure"
            break
        alpha, f_new, g_new, _ = ls
        step = alpha * q
        x_new = x + step
        y_vec = g_new - g
        sy = float(step @ y_vec)
        if sy > 1e-12 * float(np.linalg.norm(step)) * float(np.linalg.norm(y_vec)):
            s_list.append(step)
            y_list.append(y_vec)
            rho_list.append(1.0 / sy)
            if len(s_list) > config.memory:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)
        x, f, g = x_new, f_new, g_new
        iterations = it + 1
        history.append(f)
        if f < best_f:
            best_f, best_x = f, x.copy()

    gnorm = float(np.linalg.norm(g, np.inf))
    if status != "line_search_failure" and gnorm <= config.grad_tol:
        status = "converged"
    if f > best_f:
        x, f = best_x, best_f
    return OptimizeResult(
        x=x, value=f, grad_norm=gnorm, iterations=iterations,
        status=status, history=history,
    )
