"""Loss assembly for forward and inverse problems.

Forward: quadrature-weighted squared residual sums over the spatial
boundary, the initial slice and (scaled by the residual multiplier) the
weighted interior residual. Inverse: the data mismatch replaces the
boundary/initial terms, which are unknown there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import network, problems, tape
from .sampling import TrainingSet
from .weighting import WeightScheme, weighted_interior_residual


@dataclass
class LossBreakdown:
    interior_term: float
    sb_term: float
    tb_term: float
    data_term: float
    reg_term: float
    lam: float
    lam_reg: float

    @property
    def total(self) -> float:
        return (
            self.sb_term
            + self.tb_term
            + self.data_term
            + self.lam * self.interior_term
            + self.lam_reg * self.reg_term
        )

    def training_errors(self) -> dict:
        """A-posteriori training errors: root of each quadrature sum."""
        out = {
            "interior": float(np.sqrt(self.interior_term)),
            "sb": float(np.sqrt(self.sb_term)),
            "tb": float(np.sqrt(self.tb_term)),
        }
        out["data"] = float(np.sqrt(self.data_term))
        out["combined"] = float(
            np.sqrt(self.interior_term + self.sb_term + self.tb_term + self.data_term)
        )
        return out


def _quad_sum(residual: tape.Node, weights: np.ndarray, family: str) -> tape.Node:
    if not np.all(np.isfinite(residual.value)):
        bad = int(np.argmax(~np.isfinite(residual.value)))
        raise FloatingPointError(f"non-finite {family} residual at point {bad}")
    return tape.dot(weights, residual * residual)


def assemble_loss(
    problem: problems.ProblemSpec,
    model,
    tset: TrainingSet,
    scheme: WeightScheme,
    lam: float = 1.0,
    lam_reg: float = 0.0,
    param_leaves=None,
):
    """Total loss as a tape node, plus its numeric breakdown."""
    model = problems.as_model(model)
    zero = tape.Node(0.0)

    r_int = problems.interior_residual_node(problem, model, tset.interior)
    r_int = weighted_interior_residual(scheme, r_int)
    interior = _quad_sum(r_int, tset.interior_weights, "interior")

    sb = zero
    tb = zero
    data = zero
    if problem.mode == "forward":
        for stream in problems.boundary_residual_nodes(
            problem, model, tset.spatial_boundary, tset.sb_faces
        ):
            sb = sb + _quad_sum(stream, tset.sb_weights, "spatial boundary")
        tb = _quad_sum(
            problems.temporal_residual_node(problem, model, tset.temporal_boundary),
            tset.tb_weights,
            "temporal boundary",
        )
    else:
        data = _quad_sum(
            problems.data_residual_node(
                problem, model, tset.data_points, tset.data_values
            ),
            tset.data_weights,
            "data",
        )

    total = sb + tb + data + float(lam) * interior
    reg = zero
    if lam_reg > 0.0 and param_leaves is not None:
        for p in param_leaves:
            reg = reg + tape.sumall(p * p)
        total = total + float(lam_reg) * reg

    breakdown = LossBreakdown(
        interior_term=float(interior.value),
        sb_term=float(sb.value),
        tb_term=float(tb.value),
        data_term=float(data.value),
        reg_term=float(reg.value),
        lam=float(lam),
        lam_reg=float(lam_reg),
    )
    return total, breakdown


def _chunks(n, size):
    for lo in range(0, n, size):
        yield lo, min(lo + size, n)


class Objective:
    """Flat-vector objective over network parameters for the optimizers.

    Families are evaluated in point chunks, each on its own short-lived
    tape, so memory stays bounded for the 2D problems; values and
    gradients accumulate across chunks (the loss is a plain sum over
    points). The last breakdown is kept for reporting.
    """

    # target tape-node size in floats; sets the per-chunk point count
    _CHUNK_FLOATS = 500_000

    def __init__(self, problem, tset, template: network.NetworkParams, scheme,
                 lam=1.0, lam_reg=0.0, chunk_size=None):
        self.problem = problem
        self.tset = tset
        self.template = template
        self.scheme = scheme
        self.lam = lam
        self.lam_reg = lam_reg
        self.last_breakdown = None
        self.n_evals = 0
        if chunk_size is None:
            width = max(w.shape[0] for w, _ in template.layers)
            chunk_size = max(256, self._CHUNK_FLOATS // (problem.index_set.n * width))
        self.chunk_size = chunk_size

    def params(self, theta: np.ndarray) -> network.NetworkParams:
        return self.template.unpack(np.asarray(theta, dtype=np.float64))

    def _pieces(self):
        """(builder(model, lo, hi) -> residual node, weights, family) triples."""
        problem, tset = self.problem, self.tset
        pieces = [
            (
                lambda model, lo, hi: weighted_interior_residual(
                    self.scheme,
                    problems.interior_residual_node(
                        problem, model, tset.interior[lo:hi]
                    ),
                ),
                tset.interior_weights,
                "interior",
            )
        ]
        if problem.mode == "forward":
            n_streams = 2 if problem.has_laplace_bc else 1
            for k in range(n_streams):
                pieces.append(
                    (
                        lambda model, lo, hi, k=k: problems.boundary_residual_nodes(
                            problem,
                            model,
                            tset.spatial_boundary[lo:hi],
                            tset.sb_faces[lo:hi],
                        )[k],
                        tset.sb_weights,
                        "sb",
                    )
                )
            pieces.append(
                (
                    lambda model, lo, hi: problems.temporal_residual_node(
                        problem, model, tset.temporal_boundary[lo:hi]
                    ),
                    tset.tb_weights,
                    "tb",
                )
            )
        else:
            pieces.append(
                (
                    lambda model, lo, hi: problems.data_residual_node(
                        problem,
                        model,
                        tset.data_points[lo:hi],
                        tset.data_values[lo:hi],
                    ),
                    tset.data_weights,
                    "data",
                )
            )
        return pieces

    def evaluate(self, theta: np.ndarray, with_grad=True):
        p = self.params(theta)
        arrays = p.arrays()
        grad = np.zeros(theta.size) if with_grad else None
        terms = {"interior": 0.0, "sb": 0.0, "tb": 0.0, "data": 0.0}
        factors = {"interior": float(self.lam), "sb": 1.0, "tb": 1.0, "data": 1.0}

        for builder, weights, family in self._pieces():
            for lo, hi in _chunks(len(weights), self.chunk_size):

                def fn(leaves):
                    layers = [
                        (leaves[2 * i], leaves[2 * i + 1])
                        for i in range(len(p.layers))
                    ]
                    model = lambda coords: network.forward(layers, coords)
                    r = builder(model, lo, hi)
                    return _quad_sum(r, weights[lo:hi], family)

                if with_grad:
                    val, grads = tape.value_and_grad(fn, arrays)
                    grad += factors[family] * np.concatenate(
                        [g.ravel() for g in grads]
                    )
                else:
                    val = float(fn([tape.Node(a) for a in arrays]).value)
                    if not np.isfinite(val):
                        raise FloatingPointError(f"non-finite {family} loss term")
                terms[family] += val

        reg = 0.0
        if self.lam_reg > 0.0:
            reg = float(sum((a * a).sum() for a in arrays))
            if with_grad:
                grad += 2.0 * self.lam_reg * theta
        self.last_breakdown = LossBreakdown(
            interior_term=terms["interior"],
            sb_term=terms["sb"],
            tb_term=terms["tb"],
            data_term=terms["data"],
            reg_term=reg,
            lam=float(self.lam),
            lam_reg=float(self.lam_reg),
        )
        return self.last_breakdown.total, grad

    def __call__(self, theta: np.ndarray):
        self.n_evals += 1
        return self.evaluate(theta, with_grad=True)

    def breakdown(self, theta: np.ndarray) -> LossBreakdown:
        self.evaluate(theta, with_grad=False)
        return self.last_breakdown
