"""Differentiable operations on ``Tensor``.

Each op is a ``Function`` subclass with a numpy ``forward`` and a ``backward``
returning one gradient (or ``None``) per input. Elementwise ops follow numpy
broadcasting; gradients are summed back to each input's shape.
"""

import math
from typing import Any, Optional, Tuple

import numpy as np

from ..utils.exceptions import ContractError, ShapeError
from .tensor import ArrayLike, Function, Tensor

# tanh approximation of GELU
GELU_C = math.sqrt(2.0 / math.pi)
GELU_K = 0.044715


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Add(Function):
    def forward(self, a, b):
        self.save_for_backward(a.shape, b.shape)
        return a + b

    def backward(self, g):
        a_shape, b_shape = self.saved
        return (
            _unbroadcast(g, a_shape) if self.needs_input_grad[0] else None,
            _unbroadcast(g, b_shape) if self.needs_input_grad[1] else None,
        )


class Sub(Function):
    def forward(self, a, b):
        self.save_for_backward(a.shape, b.shape)
        return a - b

    def backward(self, g):
        a_shape, b_shape = self.saved
        return (
            _unbroadcast(g, a_shape) if self.needs_input_grad[0] else None,
            _unbroadcast(-g, b_shape) if self.needs_input_grad[1] else None,
        )


class Mul(Function):
    def forward(self, a, b):
        self.save_for_backward(a, b)
        return a * b

    def backward(self, g):
        a, b = self.saved
        return (
            _unbroadcast(g * b, a.shape) if self.needs_input_grad[0] else None,
            _unbroadcast(g * a, b.shape) if self.needs_input_grad[1] else None,
        )


class Div(Function):
    def forward(self, a, b):
        self.save_for_backward(a, b)
        return a / b

    def backward(self, g):
        a, b = self.saved
        return (
            _unbroadcast(g / b, a.shape) if self.needs_input_grad[0] else None,
            _unbroadcast(-g * a / (b * b), b.shape) if self.needs_input_grad[1] else None,
        )


class Neg(Function):
    def forward(self, a):
        return -a

    def backward(self, g):
        return (-g,)


class MatMul(Function):
    """``[..., m, k] @ [k, n]`` or batched ``[..., m, k] @ [..., k, n]`` with equal batch dims."""

    def forward(self, a, b):
        if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
            raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}", a.shape, b.shape)
        if b.ndim > 2 and a.shape[:-2] != b.shape[:-2]:
            raise ShapeError(f"matmul: batch dims differ, {a.shape} vs {b.shape}", a.shape, b.shape)
        self.save_for_backward(a, b)
        return np.matmul(a, b)

    def backward(self, g):
        a, b = self.saved
        da = db = None
        if self.needs_input_grad[0]:
            da = np.matmul(g, np.swapaxes(b, -1, -2))
        if self.needs_input_grad[1]:
            if b.ndim == 2:
                k, n = b.shape
                db = a.reshape(-1, k).T @ g.reshape(-1, n)
            else:
                db = np.matmul(np.swapaxes(a, -1, -2), g)
        return da, db


class Transpose(Function):
    def forward(self, a, axes: Optional[Tuple[int, ...]] = None):
        axes = tuple(reversed(range(a.ndim))) if axes is None else tuple(axes)
        self.save_for_backward(axes)
        return np.transpose(a, axes)

    def backward(self, g):
        (axes,) = self.saved
        return (np.transpose(g, np.argsort(axes)),)


class Reshape(Function):
    def forward(self, a, shape: Tuple[int, ...] = ()):
        self.save_for_backward(a.shape)
        return a.reshape(shape)

    def backward(self, g):
        (in_shape,) = self.saved
        return (g.reshape(in_shape),)


class GetItem(Function):
    """Basic or integer-array indexing; repeated indices accumulate in backward."""

    def forward(self, a, idx: Any = None):
        self.save_for_backward(a.shape, idx)
        return np.array(a[idx], dtype=np.float64)

    def backward(self, g):
        in_shape, idx = self.saved
        out = np.zeros(in_shape, dtype=np.float64)
        if _is_basic_index(idx):
            out[idx] += g
        else:
            np.add.at(out, idx, g)
        return (out,)


def _is_basic_index(idx: Any) -> bool:
    parts = idx if isinstance(idx, tuple) else (idx,)
    return all(p is Ellipsis or p is None or isinstance(p, (slice, int, np.integer)) for p in parts)


class Sum(Function):
    def forward(self, a, axis=None, keepdims: bool = False):
        self.save_for_backward(a.shape, axis, keepdims)
        return np.array(np.sum(a, axis=axis, keepdims=keepdims), dtype=np.float64)

    def backward(self, g):
        in_shape, axis, keepdims = self.saved
        if axis is not None and not keepdims:
            axes = (axis,) if isinstance(axis, int) else tuple(axis)
            axes = tuple(sorted(ax % len(in_shape) for ax in axes))
            for ax in axes:
                g = np.expand_dims(g, ax)
        return (np.broadcast_to(g, in_shape).copy(),)


class GELU(Function):
    def forward(self, x):
        inner = GELU_C * (x + GELU_K * x ** 3)
        t = np.tanh(inner)
        self.save_for_backward(x, t)
        return 0.5 * x * (1.0 + t)

    def backward(self, g):
        x, t = self.saved
        d_inner = GELU_C * (1.0 + 3.0 * GELU_K * x * x)
        return (g * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * d_inner),)


class LayerNorm(Function):
    def forward(self, x, gain, bias, eps: float = 1e-5):
        mu = x.mean(axis=-1, keepdims=True)
        var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + eps)
        xhat = (x - mu) * inv_std
        self.save_for_backward(xhat, inv_std, gain)
        return xhat * gain + bias

    def backward(self, g):
        xhat, inv_std, gain = self.saved
        lead = tuple(range(g.ndim - 1))
        dx = dgain = dbias = None
        if self.needs_input_grad[0]:
            dxhat = g * gain
            dx = inv_std * (
                dxhat
                - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
            )
        if self.needs_input_grad[1]:
            dgain = (g * xhat).sum(axis=lead)
        if self.needs_input_grad[2]:
            dbias = g.sum(axis=lead)
        return dx, dgain, dbias


class LogSoftmax(Function):
    def forward(self, x):
        if x.shape[-1] < 1:
            raise ContractError("log_softmax needs a non-empty last dimension")
        shifted = x - x.max(axis=-1, keepdims=True)
        out = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
        self.save_for_backward(out)
        return out

    def backward(self, g):
        (out,) = self.saved
        return (g - np.exp(out) * g.sum(axis=-1, keepdims=True),)


class LogSigmoid(Function):
    def forward(self, x):
        self.save_for_backward(x)
        return np.minimum(x, 0.0) - np.log1p(np.exp(-np.abs(x)))

    def backward(self, g):
        (x,) = self.saved
        # sigma(-x) in the same stable form
        sig_neg = np.exp(np.minimum(-x, 0.0) - np.log1p(np.exp(-np.abs(x))))
        return (g * sig_neg,)


class MaskedSoftmax(Function):
    """Softmax over the last axis restricted to entries where ``mask`` is True."""

    def forward(self, x, mask: Optional[np.ndarray] = None):
        if mask is None:
            mask = np.ones(x.shape, dtype=bool)
        mask = np.broadcast_to(mask, x.shape)
        if not np.all(mask.any(axis=-1)):
            raise ContractError("masked_softmax: a row has every entry masked out")
        row_max = np.where(mask, x, -np.inf).max(axis=-1, keepdims=True)
        e = np.where(mask, np.exp(np.where(mask, x - row_max, 0.0)), 0.0)
        out = e / e.sum(axis=-1, keepdims=True)
        self.save_for_backward(out)
        return out

    def backward(self, g):
        (out,) = self.saved
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    return MatMul.apply(a, b)


def log_sigmoid(x: ArrayLike) -> Tensor:
    """Elementwise log sigma(x) as min(x, 0) - log1p(exp(-|x|))."""
    return LogSigmoid.apply(x)


def log_softmax(x: ArrayLike) -> Tensor:
    return LogSoftmax.apply(x)


def layer_norm(x: ArrayLike, gain: ArrayLike, bias: ArrayLike, eps: float = 1e-5) -> Tensor:
    if eps <= 0:
        raise ContractError(f"layer_norm eps must be > 0, got {eps}")
    return LayerNorm.apply(x, gain, bias, eps=eps)


def gelu(x: ArrayLike) -> Tensor:
    return GELU.apply(x)


def masked_softmax(x: ArrayLike, mask: Optional[np.ndarray] = None) -> Tensor:
    return MaskedSoftmax.apply(x, mask=mask)


def embedding(weight: Tensor, ids: np.ndarray) -> Tensor:
    """Rows of ``weight`` selected by an integer id array; output shape ``ids.shape + (d,)``."""
    return GetItem.apply(weight, idx=np.asarray(ids, dtype=np.int64))


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    out = matmul(x, weight)
    return out + bias if bias is not None else out
