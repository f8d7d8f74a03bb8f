"""Float64 tensors with reverse-mode automatic differentiation.

A ``Tensor`` wraps a numpy array. Every differentiable operation is a
``Function`` subclass: ``Function.apply`` runs ``forward`` on raw arrays and, when
any input requires a gradient, links the output to the function instance so
``backward`` can later walk the graph. ``Tape.record(loss)`` flattens that graph
into a topologically ordered node list.

Tensors are immutable once built; only ``grad`` of leaf tensors is written, by
accumulation (``+=``), which is what lets the reward and policy heads share
backbone parameters.
"""

import contextlib
from dataclasses import dataclass, field
from typing import Any, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.exceptions import ContractError, NumericError

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]

_GRAD_ENABLED = True


def is_grad_enabled() -> bool:
    return _GRAD_ENABLED


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Run operations without recording them for backward."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def _check_finite(values: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(values)):
        bad = int(np.size(values) - np.count_nonzero(np.isfinite(values)))
        raise NumericError(f"{where} produced {bad} non-finite value(s)", {"op": where, "count": bad})


class Tensor:
    """Dense float64 array with an optional gradient."""

    # numpy operands defer to Tensor's reflected operators
    __array_ufunc__ = None

    def __init__(self, data: ArrayLike, requires_grad: bool = False):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.array(data, dtype=np.float64)
        _check_finite(arr, "Tensor()")
        self.data: np.ndarray = arr
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = np.zeros_like(arr) if requires_grad else None
        self._node: Optional["Function"] = None

    @classmethod
    def _from_op(cls, data: np.ndarray, node: Optional["Function"]) -> "Tensor":
        out = cls.__new__(cls)
        out.data = data
        out.requires_grad = node is not None
        out.grad = None
        out._node = node
        return out

    # -- introspection ---------------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        if self.requires_grad and self.is_leaf:
            if self.grad is None:
                self.grad = np.zeros_like(self.data)
            else:
                self.grad.fill(0.0)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- operators -------------------------------------------------------

    def __add__(self, other: ArrayLike) -> "Tensor":
        from .ops import Add
        return Add.apply(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        from .ops import Add
        return Add.apply(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        from .ops import Sub
        return Sub.apply(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        from .ops import Sub
        return Sub.apply(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        from .ops import Mul
        return Mul.apply(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        from .ops import Mul
        return Mul.apply(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        from .ops import Div
        return Div.apply(self, other)

    def __neg__(self) -> "Tensor":
        from .ops import Neg
        return Neg.apply(self)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        from .ops import matmul
        return matmul(self, other)

    def __getitem__(self, idx: Any) -> "Tensor":
        from .ops import GetItem
        return GetItem.apply(self, idx=idx)

    def sum(self, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> "Tensor":
        from .ops import Sum
        return Sum.apply(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> "Tensor":
        if axis is None:
            count = self.size
        else:
            axes = (axis,) if isinstance(axis, int) else tuple(axis)
            count = int(np.prod([self.shape[a] for a in axes]))
        if count == 0:
            raise ContractError("mean over an empty axis")
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape: int) -> "Tensor":
        from .ops import Reshape
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Reshape.apply(self, shape=shape)

    def transpose(self, *axes: int) -> "Tensor":
        from .ops import Transpose
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return Transpose.apply(self, axes=axes or None)


def as_tensor(value: ArrayLike) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


class Function:
    """One differentiable operation; an instance doubles as its graph node."""

    def __init__(self) -> None:
        self.parents: Tuple[Tensor, ...] = ()
        self.saved: Tuple[Any, ...] = ()
        self.needs_input_grad: Tuple[bool, ...] = ()

    def save_for_backward(self, *values: Any) -> None:
        self.saved = values

    @classmethod
    def apply(cls, *inputs: ArrayLike, **kwargs: Any) -> Tensor:
        tensors = tuple(as_tensor(x) for x in inputs)
        fn = cls()
        fn.needs_input_grad = tuple(t.requires_grad for t in tensors)
        out = fn.forward(*[t.data for t in tensors], **kwargs)
        _check_finite(out, cls.__name__)
        if _GRAD_ENABLED and any(fn.needs_input_grad):
            fn.parents = tensors
            return Tensor._from_op(out, fn)
        return Tensor._from_op(out, None)

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_output: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError


@dataclass
class TapeNode:
    """One executed op: its function (with saved values), inputs and output."""

    op: str
    input_ids: Tuple[int, ...]
    output_id: int
    fn: Function = field(repr=False)
    output: Tensor = field(repr=False)


@dataclass
class Tape:
    """Topologically ordered record of the ops that produced a tensor."""

    nodes: List[TapeNode] = field(default_factory=list)

    @classmethod
    def record(cls, root: Tensor) -> "Tape":
        nodes: List[TapeNode] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(root, False)]
        while stack:
            tensor, expanded = stack.pop()
            fn = tensor._node
            if fn is None:
                continue
            if expanded:
                nodes.append(TapeNode(
                    op=type(fn).__name__,
                    input_ids=tuple(id(p) for p in fn.parents),
                    output_id=id(tensor),
                    fn=fn,
                    output=tensor,
                ))
                continue
            if id(tensor) in visited:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            for parent in reversed(fn.parents):
                if parent._node is not None and id(parent) not in visited:
                    stack.append((parent, False))
        return cls(nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def backward(loss: Tensor, tape: Optional[Tape] = None) -> Tape:
    """Populate ``grad`` of every leaf that ``loss`` depends on.

    Leaves that require grad but are not reached keep their (zeroed) grad.
    Returns the tape that was traversed.
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss.is_leaf:
        if loss.requires_grad:
            loss.grad += np.ones_like(loss.data)
        return tape or Tape()

    tape = tape if tape is not None else Tape.record(loss)
    pending = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        grad = pending.pop(node.output_id, None)
        if grad is None:
            continue
        input_grads = node.fn.backward(grad)
        for parent, parent_grad in zip(node.fn.parents, input_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            if parent.is_leaf:
                parent.grad += parent_grad
            else:
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + parent_grad
                else:
                    pending[key] = parent_grad
    return tape
