"""Truncated multivariate Taylor arithmetic in the PDE inputs.

A :class:`TaylorScalar` carries the Taylor coefficients of a quantity with
respect to the active input variables (t, x[, y]) on a fixed downward-closed
multi-index set. Coefficients are tape nodes, so parameter gradients flow
through every extracted derivative.

Degree caps are per variable (t: 1, spatial: up to 4). An index set may be
restricted to the downward closure of the indices a problem actually reads;
truncated sums and products stay exact on any downward-closed set.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product as _iproduct

import numpy as np

from . import tape
from .tape import Node


class IndexSet:
    """A downward-closed set of multi-indices under per-variable caps."""

    def __init__(self, caps, generators=None):
        caps = tuple(int(c) for c in caps)
        if not caps or any(c < 0 for c in caps):
            raise ValueError(f"invalid degree caps {caps}")
        self.caps = caps
        box = list(_iproduct(*(range(c + 1) for c in caps)))
        if generators is not None:
            gens = [tuple(g) for g in generators]
            keep = [
                idx
                for idx in box
                if any(all(i <= j for i, j in zip(idx, g)) for g in gens)
                or sum(idx) == 0
            ]
            box = keep
        box.sort(key=lambda idx: (sum(idx), idx))
        self.indices = tuple(box)
        self.position = {idx: i for i, idx in enumerate(box)}
        self.n = len(box)
        self.max_degree = max(sum(idx) for idx in box)
        self._mul_table = None

    @property
    def nvars(self):
        return len(self.caps)

    def __contains__(self, idx):
        return tuple(idx) in self.position

    def __eq__(self, other):
        return isinstance(other, IndexSet) and self.indices == other.indices

    def __hash__(self):
        return hash(self.indices)

    def mul_table(self):
        if self._mul_table is None:
            table = []
            for gamma, g_i in self.position.items():
                for alpha, a_i in self.position.items():
                    beta = tuple(g - a for g, a in zip(gamma, alpha))
                    if all(b >= 0 for b in beta) and beta in self.position:
                        table.append((g_i, a_i, self.position[beta]))
            self._mul_table = table
        return self._mul_table

    def factorial(self, idx):
        return math.prod(math.factorial(k) for k in idx)


@lru_cache(maxsize=None)
def index_set(caps, generators=None):
    return IndexSet(caps, generators)


class TaylorScalar:
    """Taylor coefficients of one scalar quantity on a shared index set.

    `data` is a tape node of shape (n_indices, *batch); slot 0 holds the
    plain value.
    """

    __slots__ = ("iset", "data")

    def __init__(self, iset: IndexSet, data: Node):
        self.iset = iset
        self.data = data

    # -- construction ---------------------------------------------------
    @classmethod
    def constant(cls, value, iset: IndexSet):
        data = tape.embed_index(tape.as_node(value), 0, iset.n)
        return cls(iset, data)

    @property
    def value(self):
        return self.data.value[0]

    def coefficient(self, idx):
        idx = tuple(idx)
        if idx not in self.iset:
            raise ValueError(f"multi-index {idx} outside the index set")
        return self.data.value[self.iset.position[idx]]

    def coefficients(self):
        """Multi-index -> coefficient array view (diagnostic)."""
        return {idx: self.data.value[i] for idx, i in self.iset.position.items()}

    # -- ring operations ------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TaylorScalar):
            if other.iset != self.iset:
                raise ValueError("mismatched index sets")
            return other
        val = np.asarray(other, dtype=np.float64)
        if val.ndim == 0 and self.data.value.ndim > 1:
            val = val.reshape((1,) * (self.data.value.ndim - 1))
        return TaylorScalar.constant(val, self.iset)

    def __add__(self, other):
        other = self._coerce(other)
        return TaylorScalar(self.iset, self.data + other.data)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return TaylorScalar(self.iset, self.data - other.data)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return TaylorScalar(self.iset, -self.data)

    def __mul__(self, other):
        if isinstance(other, TaylorScalar):
            if other.iset != self.iset:
                raise ValueError("mismatched index sets")
            return TaylorScalar(
                self.iset,
                tape.poly_mul(self.data, other.data, self.iset.mul_table(), self.iset.n),
            )
        return TaylorScalar(self.iset, tape.as_node(float(other)) * self.data)

    __rmul__ = __mul__

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            raise ValueError("negative powers unsupported")
        if k == 0:
            return TaylorScalar.constant(np.ones(np.shape(self.value)), self.iset)
        out = self
        for _ in range(k - 1):
            out = out * self
        return out

    # -- analytic compositions -------------------------------------------
    def _compose(self, series_fn):
        """tanh/exp/... of self via the univariate Taylor series at value."""
        v = tape.take_index(self.data, 0)
        coeffs = series_fn(v, self.iset.max_degree)
        delta = self.data - tape.embed_index(v, 0, self.iset.n)
        out = tape.embed_index(coeffs[0], 0, self.iset.n)
        if self.iset.max_degree >= 1:
            power = delta
            out = out + tape.scale_rows(coeffs[1], power)
            table = self.iset.mul_table()
            for m in range(2, self.iset.max_degree + 1):
                power = tape.poly_mul(power, delta, table, self.iset.n)
                out = out + tape.scale_rows(coeffs[m], power)
        return TaylorScalar(self.iset, out)

    def tanh(self):
        return self._compose(_tanh_series)

    def exp(self):
        return self._compose(_exp_series)

    def log(self):
        return self._compose(_log_series)

    def sin(self):
        return self._compose(_sin_series)

    def cos(self):
        return self._compose(_cos_series)


def _tanh_series(v, order):
    # g' = 1 - g^2 gives (m+1) g_{m+1} = delta_{m,0} - sum_{i+j=m} g_i g_j
    g = [tape.tanh(v)]
    for m in range(order):
        conv = g[0] * g[m]
        for i in range(1, m + 1):
            conv = conv + g[i] * g[m - i]
        nxt = (1.0 - conv if m == 0 else -conv) * (1.0 / (m + 1))
        g.append(nxt)
    return g


def _exp_series(v, order):
    e = tape.exp(v)
    return [e * (1.0 / math.factorial(m)) for m in range(order + 1)]


def _log_series(v, order):
    out = [tape.log(v)]
    if order >= 1:
        inv = 1.0 / v
        p = inv
        out.append(p)
        for m in range(2, order + 1):
            p = p * inv
            out.append(p * ((-1.0) ** (m - 1) / m))
    return out


def _sin_series(v, order):
    s, c = tape.sin(v), tape.cos(v)
    cycle = [s, c, -s, -c]
    return [cycle[m % 4] * (1.0 / math.factorial(m)) for m in range(order + 1)]


def _cos_series(v, order):
    s, c = tape.sin(v), tape.cos(v)
    cycle = [c, -s, -c, s]
    return [cycle[m % 4] * (1.0 / math.factorial(m)) for m in range(order + 1)]


def taylor_lift(value, var_index: int, iset: IndexSet) -> TaylorScalar:
    """Taylor expansion of the identity in variable `var_index` at `value`."""
    if not 0 <= var_index < iset.nvars:
        raise ValueError(f"variable index {var_index} out of range")
    if iset.caps[var_index] < 1:
        raise ValueError(f"variable {var_index} has degree cap 0")
    unit = tuple(1 if i == var_index else 0 for i in range(iset.nvars))
    if unit not in iset:
        raise ValueError(f"unit index {unit} missing from the index set")
    value = np.asarray(value, dtype=np.float64)
    data = np.zeros((iset.n,) + value.shape)
    data[0] = value
    data[iset.position[unit]] = 1.0
    return TaylorScalar(iset, Node(data))


def extract_derivative(a: TaylorScalar, idx) -> Node:
    """Partial derivative of order `idx` as a tape node.

    Taylor coefficient times the factorial product of the multi-index.
    """
    idx = tuple(idx)
    if idx not in a.iset:
        raise ValueError(f"multi-index {idx} outside the index set")
    node = tape.take_index(a.data, a.iset.position[idx])
    fact = a.iset.factorial(idx)
    return node if fact == 1 else node * float(fact)


def derivative_value(a: TaylorScalar, idx) -> np.ndarray:
    return np.asarray(extract_derivative(a, idx).value)


def loss_gradient(loss_fn, arrays):
    """Gradient of a parameterized scalar loss with respect to every array.

    `loss_fn` receives one tape leaf per entry of `arrays` and must return a
    scalar node; input-derivative terms inside the loss contribute because
    Taylor coefficients are themselves tape nodes.
    """
    return tape.value_and_grad(loss_fn, arrays)
