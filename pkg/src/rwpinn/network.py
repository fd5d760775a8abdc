"""Fully-connected tanh network acting on Taylor-valued inputs.

The approximator maps (t, x[, y]) through K-1 hidden tanh layers to a
scalar; the output layer is affine. Evaluation is pure: parameters are
plain numpy arrays, and every call builds its own tape when gradients are
required.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import tape
from .taylor import IndexSet, TaylorScalar


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int
    hidden_layers: int
    width: int
    seed: int = 0

    def __post_init__(self):
        if self.hidden_layers < 1 or self.width < 1:
            raise ValueError("hidden_layers and width must be >= 1")

    @property
    def widths(self):
        return (self.input_dim,) + (self.width,) * self.hidden_layers + (1,)


class NetworkParams:
    """Ordered (weight, bias) pairs; immutable during evaluation."""

    def __init__(self, layers):
        layers = [
            (np.asarray(w, dtype=np.float64), np.asarray(b, dtype=np.float64))
            for w, b in layers
        ]
        for (w1, b1), (w2, _) in zip(layers, layers[1:]):
            if w2.shape[1] != w1.shape[0] or b1.shape[0] != w1.shape[0]:
                raise ValueError("incompatible consecutive layer dimensions")
        self.layers = layers

    @property
    def widths(self):
        return (self.layers[0][0].shape[1],) + tuple(w.shape[0] for w, _ in self.layers)

    @property
    def n_params(self):
        return sum(w.size + b.size for w, b in self.layers)

    def arrays(self):
        out = []
        for w, b in self.layers:
            out.extend((w, b))
        return out

    def pack(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def unpack(self, flat: np.ndarray) -> "NetworkParams":
        layers, off = [], 0
        for w, b in self.layers:
            nw, nb = w.size, b.size
            layers.append(
                (flat[off : off + nw].reshape(w.shape), flat[off + nw : off + nw + nb])
            )
            off += nw + nb
        return NetworkParams(layers)

    def to_json(self) -> str:
        return json.dumps(
            {
                "widths": list(self.widths),
                "values": self.pack().tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "NetworkParams":
        doc = json.loads(text)
        widths = doc["widths"]
        template = cls(
            [
                (np.zeros((widths[i + 1], widths[i])), np.zeros(widths[i + 1]))
                for i in range(len(widths) - 1)
            ]
        )
        return template.unpack(np.asarray(doc["values"], dtype=np.float64))


def parameter_count(widths) -> int:
    return sum((widths[k] + 1) * widths[k + 1] for k in range(len(widths) - 1))


def init_params(config: NetworkConfig) -> NetworkParams:
    """Xavier-uniform weights with zero biases, determined by the seed."""
    rng = np.random.default_rng(config.seed)
    widths = config.widths
    layers = []
    for d_in, d_out in zip(widths, widths[1:]):
        bound = np.sqrt(6.0 / (d_in + d_out))
        w = rng.uniform(-bound, bound, size=(d_out, d_in))
        layers.append((w, np.zeros(d_out)))
    return NetworkParams(layers)


def forward(layers, coords) -> TaylorScalar:
    """Network output as a TaylorScalar.

    `layers` is a sequence of (weight, bias) pairs given as numpy arrays or
    tape nodes; `coords` is the list of input TaylorScalars (t, x[, y]).
    """
    iset: IndexSet = coords[0].iset
    d_in = layers[0][0].shape[1] if hasattr(layers[0][0], "shape") else None
    if d_in is not None and len(coords) != d_in:
        raise ValueError(f"expected {d_in} inputs, got {len(coords)}")
    z = tape.stack([c.data for c in coords], axis=-1)
    last = len(layers) - 1
    for k, (w, b) in enumerate(layers):
        z = tape.affine(z, w, b)
        if k < last:
            z = TaylorScalar(iset, z).tanh().data
    out = tape.take_last(z)
    return TaylorScalar(iset, out)


def forward_values(params: NetworkParams, points: np.ndarray) -> np.ndarray:
    """Plain-real evaluation at points of shape (N, input_dim)."""
    z = np.asarray(points, dtype=np.float64)
    last = len(params.layers) - 1
    for k, (w, b) in enumerate(params.layers):
        z = z @ w.T + b
        if k < last:
            z = np.tanh(z)
    return z[..., 0]
