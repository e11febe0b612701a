"""Minimal reverse-mode differentiation for the reference losses.

This is deliberately not a general autodiff engine: it covers exactly the
operations the reference pipeline needs (elementwise arithmetic, matmul,
tanh, abs, reductions, reshape/concat, stop_gradient) on float64 arrays.
Gradients are accumulated by walking the recorded graph once in reverse
topological order. Everything an operation does not define a derivative
for is simply absent.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Var",
    "as_var",
    "constant",
    "stop_gradient",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "matmul",
    "tanh",
    "sqrt",
    "abs_val",
    "vsum",
    "vmean",
    "reshape",
    "concat",
    "dot",
    "l2_norm",
    "backward",
    "finite_difference_grad",
]


class Var:
    """A float64 array plus the local backward rules that produced it."""

    __slots__ = ("value", "grad", "parents")

    def __init__(self, value, parents=()):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = tuple(parents)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Var(shape={self.value.shape})"


def as_var(x) -> Var:
    return x if isinstance(x, Var) else Var(x)


def constant(x) -> Var:
    return Var(x)


def stop_gradient(x) -> Var:
    """A copy of x through which no gradient flows."""
    return Var(as_var(x).value)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    # reverse numpy broadcasting: sum over expanded axes
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def add(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    return Var(
        a.value + b.value,
        (
            (a, lambda g: _unbroadcast(g, a.value.shape)),
            (b, lambda g: _unbroadcast(g, b.value.shape)),
        ),
    )


def sub(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    return Var(
        a.value - b.value,
        (
            (a, lambda g: _unbroadcast(g, a.value.shape)),
            (b, lambda g: _unbroadcast(-g, b.value.shape)),
        ),
    )


def mul(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    return Var(
        a.value * b.value,
        (
            (a, lambda g: _unbroadcast(g * b.value, a.value.shape)),
            (b, lambda g: _unbroadcast(g * a.value, b.value.shape)),
        ),
    )


def div(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    return Var(
        a.value / b.value,
        (
            (a, lambda g: _unbroadcast(g / b.value, a.value.shape)),
            (b, lambda g: _unbroadcast(-g * a.value / (b.value * b.value), b.value.shape)),
        ),
    )


def neg(a) -> Var:
    a = as_var(a)
    return Var(-a.value, ((a, lambda g: -g),))


def matmul(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    if a.value.ndim != 2 or b.value.ndim != 2:
        raise ValueError("matmul is defined for 2-D operands only")
    return Var(
        a.value @ b.value,
        (
            (a, lambda g: g @ b.value.T),
            (b, lambda g: a.value.T @ g),
        ),
    )


def tanh(a) -> Var:
    a = as_var(a)
    out = np.tanh(a.value)
    return Var(out, ((a, lambda g: g * (1.0 - out * out)),))


def sqrt(a) -> Var:
    """Elementwise square root; the gradient blows up at zero, callers guard."""
    a = as_var(a)
    out = np.sqrt(a.value)
    return Var(out, ((a, lambda g: g * 0.5 / out),))


def abs_val(a) -> Var:
    a = as_var(a)
    sign = np.sign(a.value)
    return Var(np.abs(a.value), ((a, lambda g: g * sign),))


def vsum(a) -> Var:
    a = as_var(a)
    return Var(a.value.sum(), ((a, lambda g: np.broadcast_to(g, a.value.shape).copy()),))


def vmean(a, axis=None) -> Var:
    a = as_var(a)
    out = a.value.mean(axis=axis)
    if axis is None:
        count = a.value.size

        def back(g):
            return np.broadcast_to(g / count, a.value.shape).copy()

    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        count = int(np.prod([a.value.shape[i] for i in axes]))

        def back(g):
            g = np.expand_dims(g, axes)
            return np.broadcast_to(g / count, a.value.shape).copy()

    return Var(out, ((a, back),))


def reshape(a, shape) -> Var:
    a = as_var(a)
    old = a.value.shape
    return Var(a.value.reshape(shape), ((a, lambda g: g.reshape(old)),))


def concat(parts, axis: int = -1) -> Var:
    parts = [as_var(p) for p in parts]
    values = [p.value for p in parts]
    sizes = [v.shape[axis] for v in values]
    offsets = np.cumsum([0] + sizes)

    def make_back(i):
        def back(g):
            index = [slice(None)] * g.ndim
            index[axis] = slice(offsets[i], offsets[i + 1])
            return g[tuple(index)]

        return back

    return Var(np.concatenate(values, axis=axis), tuple((p, make_back(i)) for i, p in enumerate(parts)))


def dot(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    if a.value.ndim != 1 or b.value.ndim != 1:
        raise ValueError("dot expects 1-D vectors")
    return Var(
        a.value @ b.value,
        (
            (a, lambda g: g * b.value),
            (b, lambda g: g * a.value),
        ),
    )


def l2_norm(a) -> Var:
    a = as_var(a)
    norm = float(np.sqrt(a.value @ a.value)) if a.value.ndim == 1 else float(
        np.sqrt((a.value * a.value).sum())
    )
    if norm == 0.0:
        raise ValueError("zero-norm vector")
    return Var(norm, ((a, lambda g: g * a.value / norm),))


def backward(root: Var) -> None:
    """Accumulate gradients of a scalar root into every reachable Var."""
    if root.value.ndim != 0:
        raise ValueError("backward requires a scalar output")

    order: list[Var] = []
    seen: set[int] = set()
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
        for parent, _ in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))

    root.grad = np.ones_like(root.value)
    for node in reversed(order):
        if node.grad is None:
            continue
        for parent, vjp in node.parents:
            g = vjp(node.grad)
            parent.grad = g if parent.grad is None else parent.grad + g


def finite_difference_grad(func, arrays: dict, name: str, coords, eps: float = 1e-6):
    """Central finite differences of func(arrays) w.r.t. arrays[name] at coords.

    func must return a plain float. Returns the FD gradient per coordinate.
    """
    base = arrays[name]
    out = []
    for coord in coords:
        bumped = {k: (v.copy() if k == name else v) for k, v in arrays.items()}
        bumped[name][coord] = base[coord] + eps
        hi = func(bumped)
        bumped[name][coord] = base[coord] - eps
        lo = func(bumped)
        out.append((hi - lo) / (2.0 * eps))
    return np.asarray(out)
