# seqmodel/tensor.py
"""
Reverse-mode automatic differentiation over numpy arrays.

Every Tensor records its parents and a closure that pushes its gradient back
to them. backward() walks the recorded graph in reverse topological order.
All values are float64.
"""

from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from fps_lab.errors import ShapeError


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum grad over the axes numpy broadcast to reach it from shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("value", "grad", "name", "requires_grad", "_parents", "_backward")
    # numpy defers mixed expressions (ndarray * Tensor) to Tensor's reflected operators
    __array_ufunc__ = None

    def __init__(
        self,
        value,
        parents: Tuple["Tensor", ...] = (),
        backward: Optional[Callable[[np.ndarray], None]] = None,
        name: Optional[str] = None,
        requires_grad: bool = False,
    ):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward = backward

    @classmethod
    def leaf(cls, value, name: str) -> "Tensor":
        return cls(np.array(value, dtype=np.float64, copy=True), name=name, requires_grad=True)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def _accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        self.grad = grad if self.grad is None else self.grad + grad

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Tensor{label} shape={self.shape}>"

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------
    def __add__(self, other) -> "Tensor":
        other = as_tensor(other)

        def back(g):
            self._accumulate(_unbroadcast(g, self.shape))
            other._accumulate(_unbroadcast(g, other.shape))

        return Tensor(self.value + other.value, (self, other), back)

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return Tensor(-self.value, (self,), lambda g: self._accumulate(-g))

    def __sub__(self, other) -> "Tensor":
        return self + (-as_tensor(other))

    def __rsub__(self, other) -> "Tensor":
        return as_tensor(other) + (-self)

    def __mul__(self, other) -> "Tensor":
        other = as_tensor(other)

        def back(g):
            self._accumulate(_unbroadcast(g * other.value, self.shape))
            other._accumulate(_unbroadcast(g * self.value, other.shape))

        return Tensor(self.value * other.value, (self, other), back)

    __rmul__ = __mul__

    def __matmul__(self, other) -> "Tensor":
        other = as_tensor(other)
        if self.value.ndim != 2 or other.value.ndim != 2 or self.shape[1] != other.shape[0]:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")

        def back(g):
            self._accumulate(g @ other.value.T)
            other._accumulate(self.value.T @ g)

        return Tensor(self.value @ other.value, (self, other), back)

    def square(self) -> "Tensor":
        return Tensor(self.value ** 2, (self,), lambda g: self._accumulate(2.0 * self.value * g))

    def tanh(self) -> "Tensor":
        out = np.tanh(self.value)
        return Tensor(out, (self,), lambda g: self._accumulate(g * (1.0 - out ** 2)))

    def sigmoid(self) -> "Tensor":
        out = 0.5 * (1.0 + np.tanh(0.5 * self.value))
        return Tensor(out, (self,), lambda g: self._accumulate(g * out * (1.0 - out)))

    def sum(self) -> "Tensor":
        return Tensor(self.value.sum(), (self,), lambda g: self._accumulate(np.broadcast_to(g, self.shape).copy()))

    def mean(self) -> "Tensor":
        n = self.value.size
        return Tensor(self.value.mean(), (self,), lambda g: self._accumulate(np.full(self.shape, g / n)))

    def take(self, index: int, axis: int = 1) -> "Tensor":
        """Slice one position along axis, dropping that axis."""
        def back(g):
            full = np.zeros(self.shape)
            np.moveaxis(full, axis, 0)[index] = g
            self._accumulate(full)

        return Tensor(np.take(self.value, index, axis=axis), (self,), back)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def stack(items: Sequence[Tensor], axis: int = 1) -> Tensor:
    items = [as_tensor(t) for t in items]

    def back(g):
        for k, item in enumerate(items):
            item._accumulate(np.take(g, k, axis=axis))

    return Tensor(np.stack([t.value for t in items], axis=axis), tuple(items), back)


def concat(items: Sequence[Tensor], axis: int = -1) -> Tensor:
    items = [as_tensor(t) for t in items]
    sizes = [t.shape[axis] for t in items]
    bounds = np.cumsum([0] + sizes)

    def back(g):
        for item, lo, hi in zip(items, bounds[:-1], bounds[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(lo, hi)
            item._accumulate(g[tuple(index)])

    return Tensor(np.concatenate([t.value for t in items], axis=axis), tuple(items), back)


def _topological(root: Tensor) -> List[Tensor]:
    order: List[Tensor] = []
    seen = set()
    stack_: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack_:
        node, expanded = stack_.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack_.append((parent, False))
    return order


def backward(loss: Tensor, leaves: Iterable[Tensor] = ()) -> None:
    """
    Propagate d(loss)/d(node) to every node reachable from loss. Leaf tensors
    that are not reached keep a zero gradient.
    """
    if loss.value.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    for leaf in leaves:
        leaf.grad = np.zeros_like(leaf.value)
    if not loss.requires_grad:
        return
    order = _topological(loss)
    for node in order:
        if node._backward is not None:
            node.grad = None
    loss.grad = np.ones_like(loss.value)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
