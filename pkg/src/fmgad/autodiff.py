"""A small reverse-mode differentiation engine over numpy arrays.

Only the primitives the detector needs are provided.  Every op builds a new
``Tensor`` holding its parents and a closure that maps the output adjoint to
parent adjoints.  Shapes are checked when the op is built.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class Tensor:
    __slots__ = ("value", "parents", "backward_fn", "requires_grad", "name")

    def __init__(self, value, parents=(), backward_fn=None, requires_grad=False, name=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other) if isinstance(other, Tensor) else scale(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def param(value, name=None) -> Tensor:
    return Tensor(np.array(value, dtype=np.float64), requires_grad=True, name=name)


def const(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _node(value, parents, backward_fn):
    return Tensor(value, tuple(parents), backward_fn)


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, size in enumerate(shape):
        if size == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


# -- primitives ---------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = const(a), const(b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch {a.shape} @ {b.shape}")
    av, bv = a.value, b.value
    return _node(av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def spmm(s, b: Tensor) -> Tensor:
    """Constant (sparse or dense) matrix times a tensor."""
    b = const(b)
    if s.shape[1] != b.shape[0]:
        raise ValueError(f"spmm shape mismatch {s.shape} @ {b.shape}")
    st = s.T
    out = s @ b.value
    return _node(np.asarray(out), (b,), lambda g: (np.asarray(st @ g),))


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = const(a), const(b)
    out = a.value + b.value
    sa, sb = a.shape, b.shape
    return _node(out, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a: Tensor, b: Tensor) -> Tensor:
    a, b = const(a), const(b)
    out = a.value - b.value
    sa, sb = a.shape, b.shape
    return _node(out, (a, b), lambda g: (_unbroadcast(g, sa), -_unbroadcast(g, sb)))


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = const(a), const(b)
    av, bv = a.value, b.value
    out = av * bv
    return _node(out, (a, b),
                 lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)))


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    return _node(a.value * c, (a,), lambda g: (g * c,))


def sigmoid(a: Tensor) -> Tensor:
    out = _sigmoid(a.value)
    return _node(out, (a,), lambda g: (g * out * (1.0 - out),))


def log_sigmoid(a: Tensor) -> Tensor:
    """log(sigmoid(a)) without overflow for large |a|."""
    v = a.value
    out = -np.logaddexp(0.0, -v)
    return _node(out, (a,), lambda g: (g * _sigmoid(-v),))


def relu(a: Tensor) -> Tensor:
    mask = a.value > 0
    return _node(np.where(mask, a.value, 0.0), (a,), lambda g: (g * mask,))


def mean_rows(a: Tensor) -> Tensor:
    """Column-wise mean over the rows of a 2-D tensor."""
    if a.value.ndim != 2 or a.shape[0] == 0:
        raise ValueError("mean_rows needs a non-empty 2-D tensor")
    n = a.shape[0]
    return _node(a.value.mean(axis=0), (a,), lambda g: (np.broadcast_to(g / n, a.shape).copy(),))


def concat(a: Tensor, b: Tensor, axis: int = 1) -> Tensor:
    """Concatenate along ``axis`` (columns by default)."""
    a, b = const(a), const(b)
    if a.value.ndim != b.value.ndim or any(
            x != y for i, (x, y) in enumerate(zip(a.shape, b.shape)) if i != axis % a.value.ndim):
        raise ValueError(f"concat shape mismatch {a.shape} | {b.shape}")
    k = a.shape[axis]
    idx = [slice(None)] * a.value.ndim

    def back(g):
        lo, hi = list(idx), list(idx)
        lo[axis], hi[axis] = slice(None, k), slice(k, None)
        return g[tuple(lo)], g[tuple(hi)]

    return _node(np.concatenate([a.value, b.value], axis=axis), (a, b), back)


def reshape(a: Tensor, shape) -> Tensor:
    a = const(a)
    old = a.shape
    return _node(a.value.reshape(shape), (a,), lambda g: (g.reshape(old),))


def square(a: Tensor) -> Tensor:
    v = a.value
    return _node(v * v, (a,), lambda g: (2.0 * v * g,))


def sum(a: Tensor, axis=None) -> Tensor:  # noqa: A001
    shape = a.shape
    if axis is None:
        return _node(a.value.sum(), (a,), lambda g: (np.full(shape, g),))
    out = a.value.sum(axis=axis)
    return _node(out, (a,), lambda g: (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),))


def log(a: Tensor) -> Tensor:
    v = a.value
    return _node(np.log(v), (a,), lambda g: (g / v,))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.value)
    return _node(out, (a,), lambda g: (g * out,))


def logaddexp(a: Tensor, b: Tensor) -> Tensor:
    """log(exp(a) + exp(b)), stabilized."""
    a, b = const(a), const(b)
    if a.shape != b.shape:
        raise ValueError(f"logaddexp shape mismatch {a.shape} vs {b.shape}")
    out = np.logaddexp(a.value, b.value)
    wa = np.exp(a.value - out)
    wb = np.exp(b.value - out)
    return _node(out, (a, b), lambda g: (g * wa, g * wb))


def rowdot(a: Tensor, b: Tensor) -> Tensor:
    """Per-row dot product of two (n, k) tensors -> (n,)."""
    a, b = const(a), const(b)
    if a.shape != b.shape or a.value.ndim != 2:
        raise ValueError(f"rowdot shape mismatch {a.shape} vs {b.shape}")
    av, bv = a.value, b.value
    return _node(np.einsum("ij,ij->i", av, bv), (a, b),
                 lambda g: (g[:, None] * bv, g[:, None] * av))


def take_rows(a: Tensor, idx) -> Tensor:
    idx = np.asarray(idx, dtype=np.int64)
    shape = a.shape

    def back(g):
        out = np.zeros(shape)
        np.add.at(out, idx, g)
        return (out,)

    return _node(a.value[idx], (a,), back)


def scatter_rows(a: Tensor, idx, n_rows: int) -> Tensor:
    """Place the rows of ``a`` at ``idx`` in an otherwise zero (n_rows, k) array."""
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size != a.shape[0]:
        raise ValueError("scatter_rows needs one index per row")
    if np.unique(idx).size != idx.size:
        raise ValueError("scatter_rows indices must be distinct")
    out = np.zeros((n_rows,) + a.shape[1:])
    out[idx] = a.value
    return _node(out, (a,), lambda g: (g[idx],))


def _sigmoid(v):
    out = np.empty_like(v, dtype=np.float64)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


# -- evaluation & gradients -------------------------------------------------

def evaluate(t: Tensor) -> np.ndarray:
    """Forward value (computed eagerly at construction)."""
    return t.value


def _topo_order(root: Tensor) -> list[Tensor]:
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def gradient(root: Tensor, wrt) -> list[np.ndarray]:
    """Reverse-mode gradients of a scalar ``root`` w.r.t. each tensor in ``wrt``.

    Tensors that ``root`` does not depend on get zero gradients.
    """
    if root.value.size != 1:
        raise ValueError(f"gradient needs a scalar root, got shape {root.shape}")
    grads = {id(root): np.ones_like(root.value)}
    for node in reversed(_topo_order(root)):
        g = grads.pop(id(node), None)
        if g is None or node.backward_fn is None:
            if g is not None:
                grads[id(node)] = g
            continue
        for p, pg in zip(node.parents, node.backward_fn(g)):
            if not p.requires_grad:
                continue
            pg = np.asarray(pg, dtype=np.float64).reshape(p.shape)
            prev = grads.get(id(p))
            grads[id(p)] = pg if prev is None else prev + pg
    return [grads.get(id(w), np.zeros(w.shape)) for w in wrt]


# -- optimizer ------------------------------------------------------------------

@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState):
    """One bias-corrected Adam update.

    Returns new parameter arrays; ``state`` is advanced in place and returned.
    """
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    if len(grads) != len(params) or any(g.shape != p.shape for g, p in zip(grads, params)):
        raise ValueError("gradient shapes do not match parameters")
    state.step += 1
    b1, b2, t = state.beta1, state.beta2, state.step
    c1, c2 = 1.0 - b1 ** t, 1.0 - b2 ** t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g
        m_hat = state.m[i] / c1
        v_hat = state.v[i] / c2
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out, state
