"""Reverse-mode tape over numpy arrays.

Every differentiable quantity is a :class:`Node` holding a float64 array.
Building an expression records the graph; calling :func:`backward` on a
scalar node replays it once in reverse topological order and accumulates
gradients into the leaves. A graph is meant to be consumed by a single
backward pass and then discarded.
"""

from __future__ import annotations

import numpy as np


class Node:
    __slots__ = ("value", "parents", "vjps", "grad")

    def __init__(self, value, parents=(), vjps=()):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents
        self.vjps = vjps
        self.grad = None

    @property
    def shape(self):
        return self.value.shape

    # -- operator sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        return powi(self, k)

    def __repr__(self):
        return f"Node(shape={self.value.shape})"


def as_node(x) -> Node:
    return x if isinstance(x, Node) else Node(x)


def leaf(array) -> Node:
    """A gradient-carrying input (network weights, biases)."""
    return Node(array)


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a, b):
    a, b = as_node(a), as_node(b)
    return Node(
        a.value + b.value,
        (a, b),
        (lambda g: _unbroadcast(g, a.value.shape), lambda g: _unbroadcast(g, b.value.shape)),
    )


def sub(a, b):
    a, b = as_node(a), as_node(b)
    return Node(
        a.value - b.value,
        (a, b),
        (lambda g: _unbroadcast(g, a.value.shape), lambda g: _unbroadcast(-g, b.value.shape)),
    )


def mul(a, b):
    a, b = as_node(a), as_node(b)
    return Node(
        a.value * b.value,
        (a, b),
        (
            lambda g: _unbroadcast(g * b.value, a.value.shape),
            lambda g: _unbroadcast(g * a.value, b.value.shape),
        ),
    )


def div(a, b):
    a, b = as_node(a), as_node(b)
    inv = 1.0 / b.value
    val = a.value * inv
    return Node(
        val,
        (a, b),
        (
            lambda g: _unbroadcast(g * inv, a.value.shape),
            lambda g: _unbroadcast(-g * val * inv, b.value.shape),
        ),
    )


def neg(a):
    a = as_node(a)
    return Node(-a.value, (a,), (lambda g: -g,))


def powi(a, k):
    a = as_node(a)
    k = int(k)
    return Node(a.value**k, (a,), (lambda g: g * k * a.value ** (k - 1),))


def tanh(a):
    a = as_node(a)
    t = np.tanh(a.value)
    return Node(t, (a,), (lambda g: g * (1.0 - t * t),))


def exp(a):
    a = as_node(a)
    e = np.exp(a.value)
    return Node(e, (a,), (lambda g: g * e,))


def log(a):
    a = as_node(a)
    return Node(np.log(a.value), (a,), (lambda g: g / a.value,))


def sin(a):
    a = as_node(a)
    return Node(np.sin(a.value), (a,), (lambda g: g * np.cos(a.value),))


def cos(a):
    a = as_node(a)
    return Node(np.cos(a.value), (a,), (lambda g: -g * np.sin(a.value),))


def sqrt(a):
    a = as_node(a)
    s = np.sqrt(a.value)
    return Node(s, (a,), (lambda g: g * 0.5 / s,))


def sumall(a):
    a = as_node(a)
    return Node(a.value.sum(), (a,), (lambda g: np.broadcast_to(g, a.value.shape),))


def dot(w, a):
    """sum(w * a) with constant weights `w` (numpy array)."""
    a = as_node(a)
    w = np.asarray(w, dtype=np.float64)
    return Node((w * a.value).sum(), (a,), (lambda g: g * w,))


def take_index(a, i):
    """Slice index `i` along axis 0."""
    a = as_node(a)

    def vjp(g):
        out = np.zeros_like(a.value)
        out[i] = g
        return out

    return Node(a.value[i], (a,), (vjp,))


def embed_index(a, i, n):
    """Place `a` at slot `i` of a new leading axis of length `n`."""
    a = as_node(a)
    val = np.zeros((n,) + a.value.shape)
    val[i] = a.value
    return Node(val, (a,), (lambda g: g[i],))


def scale_rows(c, a):
    """Multiply every slice of `a` along axis 0 by `c` (shape = a.shape[1:])."""
    c, a = as_node(c), as_node(a)
    return Node(
        c.value[None] * a.value,
        (c, a),
        (
            lambda g: _unbroadcast((g * a.value).sum(axis=0), c.value.shape),
            lambda g: g * c.value[None],
        ),
    )


def stack(nodes, axis=-1):
    nodes = [as_node(x) for x in nodes]
    val = np.stack([x.value for x in nodes], axis=axis)

    def make_vjp(i):
        return lambda g: np.take(g, i, axis=axis)

    return Node(val, tuple(nodes), tuple(make_vjp(i) for i in range(len(nodes))))


def affine(x, w, b):
    """x @ w.T + b, with b added only to the zeroth slice of axis 0.

    `x` has shape (n_idx, N, d_in); the bias is a degree-zero term of the
    Taylor polynomial, so it only shifts the constant coefficient.
    """
    x, w, b = as_node(x), as_node(w), as_node(b)
    val = x.value @ w.value.T
    val[0] += b.value

    def vjp_x(g):
        return g @ w.value

    def vjp_w(g):
        return np.einsum("inj,ink->jk", g, x.value)

    def vjp_b(g):
        return g[0].sum(axis=0)

    return Node(val, (x, w, b), (vjp_x, vjp_w, vjp_b))


def take_last(a, i=0):
    """Slice index `i` along the last axis."""
    a = as_node(a)

    def vjp(g):
        out = np.zeros_like(a.value)
        out[..., i] = g
        return out

    return Node(a.value[..., i], (a,), (vjp,))


def poly_mul(a, b, table, n_out):
    """Truncated polynomial product along axis 0.

    `table` is a list of (gamma, alpha, beta) slot triples with
    index(gamma) = index(alpha) + index(beta) inside a downward-closed
    multi-index set.
    """
    a, b = as_node(a), as_node(b)
    av, bv = a.value, b.value
    val = np.zeros((n_out,) + np.broadcast_shapes(av.shape[1:], bv.shape[1:]))
    for g_i, a_i, b_i in table:
        val[g_i] += av[a_i] * bv[b_i]

    def vjp_a(g):
        out = np.zeros_like(av)
        for g_i, a_i, b_i in table:
            out[a_i] += _unbroadcast(g[g_i] * bv[b_i], av.shape[1:])
        return out

    def vjp_b(g):
        out = np.zeros_like(bv)
        for g_i, a_i, b_i in table:
            out[b_i] += _unbroadcast(g[g_i] * av[a_i], bv.shape[1:])
        return out

    return Node(val, (a, b), (vjp_a, vjp_b))


def _toposort(root):
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(root, seed=1.0):
    """Accumulate d(root)/d(node) into `.grad` of every reachable node."""
    if root.value.shape != ():
        raise ValueError("backward pass expects a scalar root")
    order = _toposort(root)
    for node in order:
        node.grad = None
    root.grad = np.asarray(seed, dtype=np.float64)
    for node in reversed(order):
        g = node.grad
        if g is None:
            continue
        for parent, vjp in zip(node.parents, node.vjps):
            contrib = vjp(g)
            if parent.grad is None:
                parent.grad = contrib
            else:
                parent.grad = parent.grad + contrib


def value_and_grad(fn, arrays):
    """Evaluate fn(leaves) built from `arrays` and return (value, grads).

    Raises FloatingPointError if the result is not finite.
    """
    leaves = [leaf(a) for a in arrays]
    out = fn(leaves)
    val = float(out.value)
    if not np.isfinite(val):
        raise FloatingPointError(f"non-finite objective value: {val}")
    backward(out)
    grads = [
        lf.grad if lf.grad is not None else np.zeros_like(lf.value) for lf in leaves
    ]
    return val, grads
