"""Define-by-run reverse-mode autodiff over small float64 arrays.

Ops only record onto the active :class:`Tape`; outside a ``with Tape():`` block they are
plain numpy computations, which is how evaluation rollouts run.
"""

from contextvars import ContextVar
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from navgen.errors import NumericalError, ShapeError, TapeError


_ACTIVE_TAPE: ContextVar[Optional["Tape"]] = ContextVar("navgen_active_tape", default=None)

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence]


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=np.float64)
        if self.data.ndim > 3:
            raise ShapeError(f"tensors have at most 3 axes, got shape {self.data.shape}")
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        label = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def parameter(data, name: Optional[str] = None) -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


def as_tensor(value: ArrayLike) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


class _Record:
    __slots__ = ("out", "parents", "backward")

    def __init__(self, out: Tensor, parents: Sequence[Tensor], backward: Callable):
        self.out = out
        self.parents = parents
        self.backward = backward


class Tape:
    """Ordered op records; creation order is a topological order of the graph."""

    def __init__(self):
        self.records: List[_Record] = []
        self.consumed = False
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE_TAPE.reset(self._token)
        self._token = None
        return False

    def __len__(self):
        return len(self.records)

    def record(self, out: Tensor, parents: Sequence[Tensor], backward: Callable):
        if self.consumed:
            raise TapeError("tape already ran backward; call reset() before recording again")
        self.records.append(_Record(out, parents, backward))

    def reset(self):
        self.records = []
        self.consumed = False

    def backward(self, loss: Tensor):
        """Accumulate d loss / d p into ``p.grad`` for every leaf parameter reached from ``loss``."""
        if self.consumed:
            raise TapeError("backward was already called on this tape; reset it first")
        if loss.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        self.consumed = True
        if not loss.requires_grad:
            return
        produced = {id(r.out) for r in self.records}
        if id(loss) not in produced:
            loss.grad = np.ones_like(loss.data) if loss.grad is None else loss.grad + 1.0
            return
        grads = {id(loss): np.ones_like(loss.data)}
        for record in reversed(self.records):
            g = grads.pop(id(record.out), None)
            if g is None:
                continue
            for parent, pg in zip(record.parents, record.backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in produced:
                    grads[key] = grads[key] + pg if key in grads else pg
                else:
                    parent.grad = np.array(pg, copy=True) if parent.grad is None else parent.grad + pg


def current_tape() -> Optional[Tape]:
    return _ACTIVE_TAPE.get()


def backward(loss: Tensor):
    tape = current_tape()
    if tape is None:
        raise TapeError("backward called outside an active tape")
    tape.backward(loss)


def _finish(op: str, data: np.ndarray, parents: Sequence[Tensor], grad_fn: Callable) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NumericalError(f"{op} produced non-finite values")
    tape = _ACTIVE_TAPE.get()
    needs = tape is not None and any(p.requires_grad for p in parents)
    out = Tensor(data, requires_grad=needs)
    if needs:
        tape.record(out, parents, grad_fn)
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_check(op: str, a: Tensor, b: Tensor):
    try:
        shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None
    if len(shape) > 3:
        raise ShapeError(f"{op}: result shape {shape} has more than 3 axes")


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("add", a, b)
    return _finish(
        "add", a.data + b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape))
    )


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("sub", a, b)
    return _finish(
        "sub", a.data - b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape))
    )


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("mul", a, b)
    return _finish(
        "mul",
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim not in (2, 3) or b.ndim != 2 or a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def grad_fn(g):
        ga = g @ b.data.T
        gb = np.tensordot(a.data, g, axes=(tuple(range(a.ndim - 1)), tuple(range(a.ndim - 1))))
        return ga, gb

    return _finish("matmul", a.data @ b.data, (a, b), grad_fn)


def transpose(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    if x.ndim != 2:
        raise ShapeError(f"transpose expects a matrix, got shape {x.shape}")
    return _finish("transpose", x.data.T, (x,), lambda g: (g.T,))


def reshape(x: ArrayLike, shape: Tuple[int, ...]) -> Tensor:
    x = as_tensor(x)
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view shape {x.shape} as {shape}") from None
    return _finish("reshape", data, (x,), lambda g: (g.reshape(x.shape),))


def concat(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat needs at least one tensor")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError(f"concat: incompatible shapes {[t.shape for t in tensors]} on axis {axis}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def grad_fn(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _finish("concat", data, tuple(tensors), grad_fn)


def stack_rows(tensors: Sequence[ArrayLike]) -> Tensor:
    """Stack 1-D tensors into a matrix."""
    return concat([reshape(as_tensor(t), (1, -1)) for t in tensors], axis=0)


def slice(x: ArrayLike, axis: int, start: int, stop: int) -> Tensor:  # pylint: disable=redefined-builtin
    x = as_tensor(x)
    axis = axis % max(x.ndim, 1)
    if not 0 <= start < stop <= x.shape[axis]:
        raise ShapeError(f"slice [{start}:{stop}] out of range for axis {axis} of shape {x.shape}")
    index = [np.s_[:]] * x.ndim
    index[axis] = np.s_[start:stop]
    index = tuple(index)

    def grad_fn(g):
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return _finish("slice", x.data[index], (x,), grad_fn)


def embedding_lookup(table: Tensor, ids: Sequence[int]) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    if table.ndim != 2:
        raise ShapeError(f"embedding table must be a matrix, got shape {table.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError(f"embedding ids outside table of shape {table.shape}")

    def grad_fn(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids, g)
        return (full,)

    return _finish("embedding_lookup", table.data[ids], (table,), grad_fn)


def tanh(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    y = np.tanh(x.data)
    return _finish("tanh", y, (x,), lambda g: (g * (1.0 - y * y),))


def sigmoid(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    y = 0.5 * (1.0 + np.tanh(0.5 * x.data))
    return _finish("sigmoid", y, (x,), lambda g: (g * y * (1.0 - y),))


def relu(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return _finish("relu", x.data * mask, (x,), lambda g: (g * mask,))


def _stable_softmax(data: np.ndarray, axis: int) -> np.ndarray:
    shifted = data - data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def _stable_logsumexp(data: np.ndarray, axis: int) -> np.ndarray:
    m = data.max(axis=axis, keepdims=True)
    return (m + np.log(np.exp(data - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def softmax(x: ArrayLike, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    s = _stable_softmax(x.data, axis)
    return _finish("softmax", s, (x,), lambda g: (s * (g - (g * s).sum(axis=axis, keepdims=True)),))


def log_softmax(x: ArrayLike, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    out = x.data - np.expand_dims(_stable_logsumexp(x.data, axis), axis)
    s = np.exp(out)
    return _finish("log_softmax", out, (x,), lambda g: (g - s * g.sum(axis=axis, keepdims=True),))


def logsumexp(x: ArrayLike, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    s = _stable_softmax(x.data, axis)
    return _finish("logsumexp", _stable_logsumexp(x.data, axis), (x,), lambda g: (np.expand_dims(g, axis) * s,))


def nll(logits: ArrayLike, target_index: int) -> Tensor:
    """-log softmax(logits)[target] for a 1-D score vector."""
    logits = as_tensor(logits)
    if logits.ndim != 1:
        raise ShapeError(f"nll expects a score vector, got shape {logits.shape}")
    if not 0 <= target_index < logits.shape[0]:
        raise ShapeError(f"nll target {target_index} out of range for {logits.shape[0]} scores")
    s = _stable_softmax(logits.data, 0)
    value = _stable_logsumexp(logits.data, 0) - logits.data[target_index]

    def grad_fn(g):
        d = s.copy()
        d[target_index] -= 1.0
        return (g * d,)

    return _finish("nll", np.asarray(value), (logits,), grad_fn)


def sum(x: ArrayLike, axis: Optional[int] = None) -> Tensor:  # pylint: disable=redefined-builtin
    x = as_tensor(x)

    def grad_fn(g):
        if axis is None:
            return (np.broadcast_to(g, x.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return _finish("sum", np.asarray(x.data.sum(axis=axis)), (x,), grad_fn)


def mean(x: ArrayLike, axis: Optional[int] = None) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else x.shape[axis]
    return mul(sum(x, axis=axis), 1.0 / count)
