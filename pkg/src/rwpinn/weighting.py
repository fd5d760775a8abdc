"""Residual-based weighting schemes.

The interior residual r is rescaled by a weight computed from its own
value: sigmoid form (RWa) or softplus-tanh form (RWb). The weight is
treated as a constant during differentiation, so the gradient of the
weighted residual is exactly weight * gradient(r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tape

METHODS = ("pinn", "rwa", "rwb")


@dataclass(frozen=True)
class WeightScheme:
    kind: str = "pinn"  # "pinn" (no weighting) | "rwa" | "rwb"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in METHODS:
            raise ValueError(f"unknown weighting scheme {self.kind!r}")
        if self.kind != "pinn" and not 0.0 < self.scale <= 1.0:
            raise ValueError("scale must lie in (0, 1]")


def weight(scheme: WeightScheme, residual) -> np.ndarray:
    """Pointwise weight for a raw residual value."""
    r = np.asarray(residual, dtype=np.float64)
    if scheme.kind == "pinn":
        return np.ones_like(r)
    z = scheme.scale * r
    if scheme.kind == "rwa":
        # sigmoid(-z), written to avoid overflow for large |z|
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = np.exp(-z[pos]) / (1.0 + np.exp(-z[pos]))
        out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
        return out
    # rwb: tanh(softplus(-z))
    return np.tanh(np.logaddexp(0.0, -z))


def weighted_interior_residual(scheme: WeightScheme, residual: tape.Node) -> tape.Node:
    """Apply the detached weight to a parameter-tracked residual node."""
    if scheme.kind == "pinn":
        return residual
    w = weight(scheme, residual.value)
    return tape.Node(w) * residual
