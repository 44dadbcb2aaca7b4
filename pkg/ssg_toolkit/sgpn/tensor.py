"""Reverse-mode automatic differentiation over numpy arrays.

Every operation returns a new :class:`Tensor` that remembers its inputs and a
closure mapping the output adjoint to input adjoints. ``backward`` walks the
recorded graph in reverse topological order and accumulates ``grad`` on every
tensor that requires it.
"""
import contextlib
import logging
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float, int, Sequence]

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Run operations without recording them for differentiation."""
    global _grad_enabled
    previous, _grad_enabled = _grad_enabled, False
    try:
        yield
    finally:
        _grad_enabled = previous


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """A float64 array with an optional gradient buffer."""

    __array_ufunc__ = None

    def __init__(self, data: ArrayLike, requires_grad: bool = False,
                 parents: Tuple["Tensor", ...] = (), backward_fn: Optional[Callable] = None,
                 name: str = ""):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = parents
        self._backward_fn = backward_fn

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    @staticmethod
    def lift(value: Union["Tensor", ArrayLike]) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    def _make(self, data: np.ndarray, parents: Tuple["Tensor", ...], backward_fn: Callable) -> "Tensor":
        needs = _grad_enabled and any(p.requires_grad for p in parents)
        if not needs:
            return Tensor(data)
        return Tensor(data, True, parents, backward_fn)

    # ------------------------------------------------------------------
    # Backward pass
    # ------------------------------------------------------------------
    def backward(self, grad: Optional[ArrayLike] = None) -> None:
        """Accumulate d(self)/d(t) into ``t.grad`` for every reachable tensor."""
        if grad is None:
            if self.size != 1:
                raise ValueError("backward() without a seed gradient needs a scalar tensor")
            grad = np.ones_like(self.data)
        order: List[Tensor] = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))

        adjoints = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(order):
            adjoint = adjoints.pop(id(node), None)
            if adjoint is None:
                continue
            if node._backward_fn is None:
                node.grad = adjoint if node.grad is None else node.grad + adjoint
                continue
            for parent, parent_grad in zip(node._parents, node._backward_fn(adjoint)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                adjoints[key] = adjoints[key] + parent_grad if key in adjoints else parent_grad

    # ------------------------------------------------------------------
    # Elementwise arithmetic
    # ------------------------------------------------------------------
    def __add__(self, other):
        other = Tensor.lift(other)
        a, b = self.shape, other.shape
        return self._make(self.data + other.data, (self, other),
                          lambda g: (_unbroadcast(g, a), _unbroadcast(g, b)))

    __radd__ = __add__

    def __neg__(self):
        return self._make(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other):
        return self + (-Tensor.lift(other))

    def __rsub__(self, other):
        return Tensor.lift(other) + (-self)

    def __mul__(self, other):
        other = Tensor.lift(other)
        a, b = self.shape, other.shape
        x, y = self.data, other.data
        return self._make(x * y, (self, other),
                          lambda g: (_unbroadcast(g * y, a), _unbroadcast(g * x, b)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Tensor.lift(other)
        a, b = self.shape, other.shape
        x, y = self.data, other.data
        return self._make(x / y, (self, other),
                          lambda g: (_unbroadcast(g / y, a), _unbroadcast(-g * x / (y * y), b)))

    def __rtruediv__(self, other):
        return Tensor.lift(other) / self

    def __pow__(self, exponent: float):
        exponent = float(exponent)
        x = self.data
        out = np.power(x, exponent)

        def backward(g):
            if exponent == 0.0:
                return (np.zeros_like(x),)
            return (g * exponent * np.power(x, exponent - 1.0),)

        return self._make(out, (self,), backward)

    def __matmul__(self, other):
        other = Tensor.lift(other)
        a, b = self.shape, other.shape
        x, y = self.data, other.data
        return self._make(
            np.matmul(x, y), (self, other),
            lambda g: (_unbroadcast(np.matmul(g, np.swapaxes(y, -1, -2)), a),
                       _unbroadcast(np.matmul(np.swapaxes(x, -1, -2), g), b)),
        )

    # ------------------------------------------------------------------
    # Nonlinearities
    # ------------------------------------------------------------------
    def relu(self) -> "Tensor":
        positive = self.data > 0
        return self._make(np.where(positive, self.data, 0.0), (self,), lambda g: (g * positive,))

    def exp(self) -> "Tensor":
        out = np.exp(self.data)
        return self._make(out, (self,), lambda g: (g * out,))

    def log(self) -> "Tensor":
        x = self.data
        return self._make(np.log(x), (self,), lambda g: (g / x,))

    def sigmoid(self) -> "Tensor":
        out = _stable_sigmoid(self.data)
        return self._make(out, (self,), lambda g: (g * out * (1.0 - out),))

    def log_sigmoid(self) -> "Tensor":
        x = self.data
        out = -np.logaddexp(0.0, -x)
        return self._make(out, (self,), lambda g: (g * _stable_sigmoid(-x),))

    def log_softmax(self, axis: int = -1) -> "Tensor":
        x = self.data
        shifted = x - x.max(axis=axis, keepdims=True)
        out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
        probs = np.exp(out)
        return self._make(out, (self,), lambda g: (g - probs * g.sum(axis=axis, keepdims=True),))

    def softmax(self, axis: int = -1) -> "Tensor":
        return self.log_softmax(axis).exp()

    # ------------------------------------------------------------------
    # Reductions
    # ------------------------------------------------------------------
    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        shape = self.shape

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return self._make(self.data.sum(axis=axis, keepdims=keepdims), (self,), backward)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        count = self.size if axis is None else self.shape[axis]
        return self.sum(axis, keepdims) * (1.0 / max(count, 1))

    def max(self, axis: int) -> "Tensor":
        """Max over ``axis``; the gradient flows to the first maximal entry."""
        x = self.data
        winners = np.expand_dims(np.argmax(x, axis=axis), axis)
        out = np.take_along_axis(x, winners, axis=axis).squeeze(axis)

        def backward(g):
            grad = np.zeros_like(x)
            np.put_along_axis(grad, winners, np.expand_dims(g, axis), axis=axis)
            return (grad,)

        return self._make(out, (self,), backward)

    # ------------------------------------------------------------------
    # Shape and indexing
    # ------------------------------------------------------------------
    def reshape(self, *shape) -> "Tensor":
        original = self.shape
        return self._make(self.data.reshape(*shape), (self,), lambda g: (g.reshape(original),))

    def __getitem__(self, index) -> "Tensor":
        x = self.data
        basic = all(isinstance(i, (slice, int, type(Ellipsis))) for i in
                    (index if isinstance(index, tuple) else (index,)))

        def backward(g):
            grad = np.zeros_like(x)
            if basic:
                grad[index] += g
            else:
                np.add.at(grad, index, g)
            return (grad,)

        return self._make(x[index], (self,), backward)

    def take_rows(self, indices: Sequence[int]) -> "Tensor":
        """Rows ``indices`` of a 2D tensor; repeated indices accumulate gradient."""
        indices = np.asarray(indices, dtype=np.int64)
        x = self.data

        def backward(g):
            grad = np.zeros_like(x)
            np.add.at(grad, indices, g)
            return (grad,)

        return self._make(x[indices], (self,), backward)

    def segment_sum(self, segments: Sequence[int], num_segments: int) -> "Tensor":
        """Sum rows sharing a segment id into ``num_segments`` output rows."""
        segments = np.asarray(segments, dtype=np.int64)
        out = np.zeros((num_segments,) + self.shape[1:])
        np.add.at(out, segments, self.data)
        return self._make(out, (self,), lambda g: (g[segments],))


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -x))


def concat(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    tensors = [Tensor.lift(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]
    data = np.concatenate([t.data for t in tensors], axis=axis)

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return tensors[0]._make(data, tuple(tensors), backward)


def split(tensor: Tensor, sizes: Sequence[int], axis: int = -1) -> List[Tensor]:
    """Consecutive blocks of ``sizes`` along ``axis``."""
    blocks, start = [], 0
    for size in sizes:
        index = [slice(None)] * tensor.ndim
        index[axis] = slice(start, start + size)
        blocks.append(tensor[tuple(index)])
        start += size
    return blocks


def parameter(data: ArrayLike, name: str = "") -> Tensor:
    return Tensor(data, requires_grad=True, name=name)
