"""Generalization errors and numeric diagnostics for the error bounds.

The generalization error is the space-time L2 distance between the
trained network and the exact solution, approximated with composite
trapezoid quadrature on a uniform tensor grid. The bound diagnostics
evaluate the a-posteriori generalization bounds with constants estimated
from the trained network and the exact solution on the same grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import network, problems, sampling
from .taylor import TaylorScalar, taylor_lift
from .weighting import WeightScheme, weight


@dataclass
class ErrorReport:
    e_g: float  # L2 space-time error
    e_g_rel: float  # e_g / L2 norm of the exact solution
    sup_error: float
    times: np.ndarray
    slice_errors: np.ndarray  # spatial L2 error at each time node
    resolution: int


def _default_resolution(problem) -> int:
    return 33 if problem.domain.spatial_dim == 2 else 65


def generalization_error(problem, params, resolution: int | None = None) -> ErrorReport:
    """Space-time L2 error of the trained network against the exact solution."""
    if problem.exact is None:
        raise ValueError(f"problem {problem.name} has no exact solution")
    if resolution is None:
        resolution = _default_resolution(problem)
    grid = sampling.test_grid(problem.domain, resolution)
    u = network.forward_values(params, grid.points)
    u_exact = problem.exact(grid.points)
    diff2 = grid.reshape((u - u_exact) ** 2)
    exact2 = grid.reshape(u_exact**2)

    # spatial quadrature weights shared by every time slice
    w_sp = sampling.trapezoid_weights(resolution)
    sp = w_sp
    for _ in range(problem.domain.spatial_dim - 1):
        sp = np.multiply.outer(sp, w_sp)
    axes = tuple(range(1, 1 + problem.domain.spatial_dim))
    slice_sq = (diff2 * sp).sum(axis=axes)
    w_t = sampling.trapezoid_weights(resolution, problem.domain.time_horizon)

    e_g = float(np.sqrt(w_t @ slice_sq))
    norm = float(np.sqrt(w_t @ (exact2 * sp).sum(axis=axes)))
    return ErrorReport(
        e_g=e_g,
        e_g_rel=e_g / norm if norm > 0 else np.inf,
        sup_error=float(np.max(np.abs(u - u_exact))),
        times=grid.axes[0],
        slice_errors=np.sqrt(slice_sq),
        resolution=resolution,
    )


@dataclass
class BoundDiagnostics:
    training_errors: dict
    c1: float
    c2: float
    lipschitz: float  # C_R (Burgess) or C_F (EFK)
    c3: float | None  # EFK only
    c_energy: float | None  # EFK only
    c_norms: dict  # sup norms of u (exact) and u* (network) derivatives
    alphas: dict  # assumed per-family quadrature rates
    quad_constants: dict  # per-family C_quad from the measured error and rate
    quad_errors: dict  # measured per-family quadrature errors
    bound: float
    e_g: float
    ratio: float  # e_g / bound


_ALPHAS = {"sobol": 1.0, "random": 0.5}


def _derivative_sups(taylor_fn, points, iset, chunk=2048):
    """Sup of |coefficient * factorial| per multi-index over the points."""
    sups = {idx: 0.0 for idx in iset.indices}
    points = np.atleast_2d(points)
    for lo in range(0, len(points), chunk):
        pts = points[lo : lo + chunk]
        coords = [taylor_lift(pts[:, j], j, iset) for j in range(pts.shape[1])]
        u = taylor_fn(coords)
        for idx, i in iset.position.items():
            d = np.max(np.abs(u.data.value[i])) * iset.factorial(idx)
            sups[idx] = max(sups[idx], float(d))
    return sups


def _spatial_c_norm(sups, order):
    """Max sup over spatial multi-indices of total order <= `order`."""
    return max(v for idx, v in sups.items() if idx[0] == 0 and sum(idx) <= order)


def _value_range(problem, params, grid):
    u_net = network.forward_values(params, grid.points)
    u_ex = problem.exact(grid.points)
    return (
        min(float(u_net.min()), float(u_ex.min())),
        max(float(u_net.max()), float(u_ex.max())),
    )


def _lipschitz_burgess(lo, hi):
    # |R'(v)| = e^{-v} + e^{-2v} decreases in v, so the sup sits at the minimum
    return float(np.exp(-lo) + np.exp(-2.0 * lo))

def _lipschitz_cubic(lo, hi):
    # |F'(v)| = |3v^2 - 1| peaks at an endpoint or at v = 0
    cands = [abs(3.0 * lo**2 - 1.0), abs(3.0 * hi**2 - 1.0)]
    if lo <= 0.0 <= hi:
        cands.append(1.0)
    return float(max(cands))


def _weighted_residual_sq_sum(problem, params, scheme, points, weights, chunk):
    """Quadrature sum of the squared weighted residual, in point chunks.

    Chunking keeps the Taylor graphs short-lived; evaluating the 2D test
    grid in one piece exhausts memory.
    """
    total = 0.0
    for lo in range(0, len(points), chunk):
        r = problems.interior_residual(problem, params, points[lo : lo + chunk])
        r = weight(scheme, r) * r
        total += float(weights[lo : lo + chunk] @ r**2)
    return total


def _quadrature_errors(problem, params, scheme, training_errors, resolution,
                       chunk=2048):
    """Measured |continuous integral - training quadrature| per family."""
    grid = sampling.test_grid(problem.domain, resolution)
    d = problem.domain.spatial_dim
    w_sp = sampling.trapezoid_weights(resolution)
    sp = w_sp
    for _ in range(d - 1):
        sp = np.multiply.outer(sp, w_sp)
    sp = sp.ravel()
    w_t = sampling.trapezoid_weights(resolution, problem.domain.time_horizon)

    # interior: integral of the squared weighted residual over space-time
    i_int = _weighted_residual_sq_sum(
        problem, params, scheme, grid.points, grid.weights, chunk
    )

    # temporal slice: spatial integral of the squared initial residual
    x_nodes = grid.points[: sp.size, 1:]
    u0 = network.forward_values(
        params, np.concatenate([np.zeros((len(x_nodes), 1)), x_nodes], axis=1)
    )
    i_tb = float(sp @ (u0 - problem.initial(x_nodes)) ** 2)

    # spatial boundary: per-face trapezoid in (t, tangential coords)
    i_sb = 0.0
    if d == 1:
        face_axes = [grid.axes[0]]
        face_w = [w_t]
    else:
        face_axes = [grid.axes[0], grid.axes[1]]
        face_w = [w_t, w_sp]
    mesh = np.meshgrid(*face_axes, indexing="ij")
    flat = [m.ravel() for m in mesh]
    wf = face_w[0]
    for w_ in face_w[1:]:
        wf = np.multiply.outer(wf, w_)
    wf = wf.ravel()
    for face in range(problem.domain.n_faces):
        axis, side = face // 2, face % 2
        pts = np.zeros((len(flat[0]), 1 + d))
        pts[:, 0] = flat[0]
        tangential = [i for i in range(d) if i != axis]
        for j, ax in enumerate(tangential):
            pts[:, 1 + ax] = flat[1 + j]
        pts[:, 1 + axis] = float(side)
        for lo in range(0, len(pts), chunk):
            sel = pts[lo : lo + chunk]
            for stream in problems.boundary_residuals(
                problem, params, sel, np.full(len(sel), face)
            ):
                i_sb += float(wf[lo : lo + chunk] @ stream**2)

    return {
        "interior": abs(i_int - training_errors["interior"] ** 2),
        "tb": abs(i_tb - training_errors["tb"] ** 2),
        "sb": abs(i_sb - training_errors["sb"] ** 2),
    }


def bound_diagnostics(
    problem,
    params,
    training_errors: dict,
    counts: dict,
    scheme: WeightScheme = WeightScheme("pinn"),
    strategy: str = "sobol",
    resolution: int | None = None,
    alphas: dict | None = None,
    c_energy: float | None = None,
) -> BoundDiagnostics:
    """Numeric evaluation of the a-posteriori generalization bound.

    `training_errors` is the dict produced by LossBreakdown.training_errors
    and `counts` maps family names ("interior", "sb", "tb") to point counts.
    Constants are estimated from the trained network and the exact solution;
    quadrature constants are folded into measured per-family quadrature
    errors under the assumed rates.
    """
    if problem.mode != "forward":
        raise ValueError("bound diagnostics apply to forward problems only")
    if problem.exact is None:
        raise ValueError("bound diagnostics need the exact solution")
    if resolution is None:
        resolution = _default_resolution(problem)
    if alphas is None:
        alpha = _ALPHAS[strategy]
        alphas = {"interior": alpha, "sb": alpha, "tb": alpha}

    T = problem.domain.time_horizon
    grid = sampling.test_grid(problem.domain, resolution)
    iset = problem.index_set
    sups_net = _derivative_sups(
        lambda coords: network.forward(params.layers, coords), grid.points, iset
    )
    sups_ex = _derivative_sups(problem.exact_taylor, grid.points, iset)
    lo, hi = _value_range(problem, params, grid)

    c3 = None
    if problem.operator_id == "Burgess1D":
        lip = _lipschitz_burgess(lo, hi)
        c1 = float(np.sqrt(T + (1.0 + 2.0 * lip) * T**2 * np.exp((1.0 + 2.0 * lip) * T)))
        # boundary C1 norms: value plus first derivatives, sup over the domain
        # closure (a superset of the boundary, so conservative)
        c1_norms = [
            max(v for idx, v in s.items() if sum(idx) <= 1) for s in (sups_ex, sups_net)
        ]
        c_bnd = 0.5 * np.sqrt(float(problem.domain.n_faces)) * sum(c1_norms)
        c2 = float(np.sqrt(c_bnd * np.sqrt(T)))
    else:
        lip = _lipschitz_cubic(lo, hi)
        if c_energy is None:
            c_energy = lip
        cx2 = _spatial_c_norm(sups_ex, 2) + _spatial_c_norm(sups_net, 2)
        cx3 = _spatial_c_norm(sups_ex, 3) + _spatial_c_norm(sups_net, 3)
        c3 = float(np.sqrt(problem.gamma * cx2**2 + cx2 + 0.5 + c_energy))
        c1 = float(np.sqrt(T + 2.0 * T**2 * c3 * np.exp(2.0 * c3 * T)))
        c2 = float(np.sqrt(8.0 * problem.gamma * cx3 * np.sqrt(T)))

    quad_errors = _quadrature_errors(problem, params, scheme, training_errors, resolution)
    quad_constants = {
        fam: quad_errors[fam] * counts[fam] ** alphas[fam] for fam in quad_errors
    }

    bound = c1 * (
        training_errors["tb"]
        + training_errors["interior"]
        + c2 * np.sqrt(training_errors["sb"])
        + np.sqrt(quad_errors["tb"])
        + np.sqrt(quad_errors["interior"])
        + c2 * quad_errors["sb"] ** 0.25
    )
    e_g = generalization_error(problem, params, resolution).e_g
    return BoundDiagnostics(
        training_errors=dict(training_errors),
        c1=c1,
        c2=c2,
        lipschitz=lip,
        c3=c3,
        c_energy=c_energy,
        c_norms={"exact": sups_ex, "network": sups_net},
        alphas=dict(alphas),
        quad_constants=quad_constants,
        quad_errors=quad_errors,
        bound=float(bound),
        e_g=e_g,
        ratio=e_g / bound if bound > 0 else np.inf,
    )
