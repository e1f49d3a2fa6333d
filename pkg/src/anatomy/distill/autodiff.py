"""Minimal reverse-mode differentiation over numpy arrays.

Every primitive checks its output for non-finite values and raises
NumericError naming the op, which doubles as the divergence detector
for training. Computation is plain sequential numpy, so results are
deterministic for fixed inputs and dtype.

Op set: add/sub/mul/div (broadcasting), matmul (with leading batch
dims), embedding gather, layer normalization, softmax, GELU, sqrt,
axis sums, dot product, L2 norm, reshape/transpose/slicing.
"""

from __future__ import annotations

import numpy as np

from anatomy.errors import NumericError


def _check(data: np.ndarray, op: str) -> np.ndarray:
    if not np.all(np.isfinite(data)):
        raise NumericError("non-finite value produced", op=op)
    return data


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient down to the shape it was broadcast from."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op")

    def __init__(self, data, requires_grad=False, parents=(), backward=None, op="leaf"):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents if self.requires_grad else ()
        self._backward = backward if self.requires_grad else None
        self.op = op

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = grad.copy() if isinstance(grad, np.ndarray) else np.asarray(grad)
        else:
            self.grad += grad

    def backward(self, seed: np.ndarray | None = None) -> None:
        """Reverse pass from this tensor; accumulates into .grad fields."""
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited or not node.requires_grad:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        self._accumulate(np.ones_like(self.data) if seed is None else np.asarray(seed))
        for node in reversed(topo):
            if node._backward is not None:
                node._backward(node.grad)

    # -- primitives ---------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return index(self, key)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x))


def _binary(a, b, fwd, bwd_a, bwd_b, op):
    a, b = _wrap(a), _wrap(b)
    out_data = _check(fwd(a.data, b.data), op)

    def backward(grad):
        if a.requires_grad:
            a._accumulate(_unbroadcast(bwd_a(grad, a.data, b.data), a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(bwd_b(grad, a.data, b.data), b.data.shape))

    return Tensor(out_data, parents=(a, b), backward=backward, op=op)


def add(a, b):
    return _binary(a, b, lambda x, y: x + y, lambda g, x, y: g, lambda g, x, y: g, "add")


def sub(a, b):
    return _binary(a, b, lambda x, y: x - y, lambda g, x, y: g, lambda g, x, y: -g, "sub")


def mul(a, b):
    return _binary(a, b, lambda x, y: x * y, lambda g, x, y: g * y, lambda g, x, y: g * x, "mul")


def div(a, b):
    return _binary(
        a, b, lambda x, y: x / y,
        lambda g, x, y: g / y,
        lambda g, x, y: -g * x / (y * y),
        "div",
    )


def matmul(a, b):
    """Matrix product; operands must be >= 2-d, leading dims broadcast."""
    a, b = _wrap(a), _wrap(b)
    out_data = _check(a.data @ b.data, "matmul")

    def backward(grad):
        if a.requires_grad:
            ga = grad @ np.swapaxes(b.data, -1, -2)
            a._accumulate(_unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ grad
            b._accumulate(_unbroadcast(gb, b.data.shape))

    return Tensor(out_data, parents=(a, b), backward=backward, op="matmul")


def gather(table: Tensor, ids) -> Tensor:
    """Embedding lookup: rows of ``table`` selected by an integer array."""
    ids = np.asarray(ids)
    out_data = _check(table.data[ids], "gather")

    def backward(grad):
        if table.requires_grad:
            acc = np.zeros_like(table.data)
            np.add.at(acc, ids, grad)
            table._accumulate(acc)

    return Tensor(out_data, parents=(table,), backward=backward, op="gather")


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then affine."""
    x, gamma, beta = _wrap(x), _wrap(gamma), _wrap(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out_data = _check(gamma.data * xhat + beta.data, "layer_norm")
    dim = x.data.shape[-1]

    def backward(grad):
        if gamma.requires_grad:
            gamma._accumulate(_unbroadcast(grad * xhat, gamma.data.shape))
        if beta.requires_grad:
            beta._accumulate(_unbroadcast(grad, beta.data.shape))
        if x.requires_grad:
            dxhat = grad * gamma.data
            term = dxhat.sum(axis=-1, keepdims=True) + xhat * (dxhat * xhat).sum(
                axis=-1, keepdims=True
            )
            x._accumulate(inv * (dxhat - term / dim))

    return Tensor(out_data, parents=(x, gamma, beta), backward=backward, op="layer_norm")


def softmax(x: Tensor) -> Tensor:
    """Max-subtracted softmax over the last axis."""
    x = _wrap(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=-1, keepdims=True)
    _check(s, "softmax")

    def backward(grad):
        if x.requires_grad:
            inner = (grad * s).sum(axis=-1, keepdims=True)
            x._accumulate(s * (grad - inner))

    return Tensor(s, parents=(x,), backward=backward, op="softmax")


_GELU_C = np.sqrt(2.0 / np.pi)


def gelu(x: Tensor) -> Tensor:
    """Tanh-form GELU."""
    x = _wrap(x)
    inner = _GELU_C * (x.data + 0.044715 * x.data**3)
    t = np.tanh(inner)
    out_data = _check(0.5 * x.data * (1.0 + t), "gelu")

    def backward(grad):
        if x.requires_grad:
            dinner = _GELU_C * (1.0 + 3 * 0.044715 * x.data**2)
            dx = 0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * dinner
            x._accumulate(grad * dx)

    return Tensor(out_data, parents=(x,), backward=backward, op="gelu")


def sqrt(x: Tensor) -> Tensor:
    x = _wrap(x)
    out_data = _check(np.sqrt(x.data), "sqrt")

    def backward(grad):
        if x.requires_grad:
            x._accumulate(grad * 0.5 / out_data)

    return Tensor(out_data, parents=(x,), backward=backward, op="sqrt")


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    x = _wrap(x)
    out_data = _check(x.data.sum(axis=axis, keepdims=keepdims), "sum")

    def backward(grad):
        if x.requires_grad:
            g = np.asarray(grad)
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            x._accumulate(np.broadcast_to(g, x.data.shape).copy())

    return Tensor(out_data, parents=(x,), backward=backward, op="sum")


def dot(a, b) -> Tensor:
    """Inner product of two 1-d vectors."""
    a, b = _wrap(a), _wrap(b)
    out_data = _check(np.dot(a.data, b.data), "dot")

    def backward(grad):
        if a.requires_grad:
            a._accumulate(grad * b.data)
        if b.requires_grad:
            b._accumulate(grad * a.data)

    return Tensor(out_data, parents=(a, b), backward=backward, op="dot")


def l2norm(x: Tensor) -> Tensor:
    """Euclidean norm of a vector."""
    x = _wrap(x)
    norm = float(np.sqrt(np.dot(x.data, x.data)))
    out_data = _check(np.asarray(norm, dtype=x.data.dtype), "l2norm")

    def backward(grad):
        if x.requires_grad:
            if norm == 0.0:
                raise NumericError("gradient undefined at zero vector", op="l2norm")
            x._accumulate(grad * x.data / norm)

    return Tensor(out_data, parents=(x,), backward=backward, op="l2norm")


def reshape(x: Tensor, shape) -> Tensor:
    x = _wrap(x)
    out_data = x.data.reshape(shape)

    def backward(grad):
        if x.requires_grad:
            x._accumulate(grad.reshape(x.data.shape))

    return Tensor(out_data, parents=(x,), backward=backward, op="reshape")


def transpose(x: Tensor, axes) -> Tensor:
    x = _wrap(x)
    out_data = x.data.transpose(axes)
    inverse = np.argsort(axes)

    def backward(grad):
        if x.requires_grad:
            x._accumulate(grad.transpose(inverse))

    return Tensor(out_data, parents=(x,), backward=backward, op="transpose")


def index(x: Tensor, key) -> Tensor:
    """Basic (non-fancy) indexing/slicing."""
    x = _wrap(x)
    out_data = x.data[key]

    def backward(grad):
        if x.requires_grad:
            acc = np.zeros_like(x.data)
            acc[key] = grad
            x._accumulate(acc)

    return Tensor(out_data, parents=(x,), backward=backward, op="index")


def scale(x: Tensor, factor: float) -> Tensor:
    x = _wrap(x)
    out_data = _check(x.data * factor, "scale")

    def backward(grad):
        if x.requires_grad:
            x._accumulate(grad * factor)

    return Tensor(out_data, parents=(x,), backward=backward, op="scale")
