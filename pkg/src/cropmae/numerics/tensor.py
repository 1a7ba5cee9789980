"""Dense n-dimensional tensors with reverse-mode automatic differentiation.

Values are numpy arrays (float32 or float64, row-major). Differentiable
operations record themselves on the active ``Tape``; replaying the records
in reverse accumulates exactly one gradient contribution per use of each
tensor. Without an active tape, every operation is a plain forward
computation, so inference costs nothing extra.

Usage:

    w = Tensor(np.zeros((4, 4)), requires_grad=True)
    with Tape() as tape:
        loss = mean(matmul(x, w) * matmul(x, w))
    grads = tape.gradients(loss)   # {tensor: ndarray}
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import ContractError, NumericError, ParameterError, ShapeError

FLOAT_DTYPES = (np.float32, np.float64)

# Backward functions receive the output gradient and return one gradient
# (or None) per recorded input, in order.
BackwardFn = Callable[[np.ndarray], tuple]


class Tensor:
    """Immutable dense array, optionally participating in gradient taping.

    ``data`` is the raw numpy array (f32 or f64). ``grad`` is populated by
    ``backward``/``Tape.gradients`` for requires_grad leaves and is
    overwritten (not accumulated) by each backward call.
    """

    __slots__ = ("data", "requires_grad", "grad", "_tape")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in FLOAT_DTYPES:
            arr = arr.astype(np.float32)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._tape: "Tape | None" = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{flag})"

    # Operator sugar; python scalars keep the tensor's dtype.
    def __add__(self, other):
        return add(self, _coerce(other, self.dtype))

    def __radd__(self, other):
        return add(_coerce(other, self.dtype), self)

    def __sub__(self, other):
        return sub(self, _coerce(other, self.dtype))

    def __rsub__(self, other):
        return sub(_coerce(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, _coerce(other, self.dtype))

    def __rmul__(self, other):
        return mul(_coerce(other, self.dtype), self)

    def __truediv__(self, other):
        return div(self, _coerce(other, self.dtype))

    def __rtruediv__(self, other):
        return div(_coerce(other, self.dtype), self)

    def __matmul__(self, other):
        return matmul(self, _coerce(other, self.dtype))

    def __neg__(self):
        return neg(self)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, axes=None):
        return transpose(self, axes)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)


class Tape:
    """Ordered record of executed differentiable operations.

    Entering the context makes this the active tape; every differentiable
    op whose inputs require grad appends (output, inputs, backward_fn).
    Records are appended in execution order, so the reversed list is a
    valid topological order of the computation.
    """

    def __init__(self):
        self._records: list[tuple[Tensor, tuple[Tensor, ...], BackwardFn]] = []

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc) -> bool:
        _TAPE_STACK.pop()
        return False

    def __len__(self) -> int:
        return len(self._records)

    def _record(self, out: Tensor, inputs: tuple[Tensor, ...], backward_fn: BackwardFn):
        self._records.append((out, inputs, backward_fn))

    def gradients(self, loss: Tensor) -> dict[Tensor, np.ndarray]:
        """Gradients of scalar ``loss`` for every requires_grad leaf reachable
        from it. Also stores each leaf gradient on ``tensor.grad``."""
        if loss.data.size != 1:
            raise ContractError(f"loss must be scalar, got shape {loss.shape}")
        pending: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        holders: dict[int, Tensor] = {id(loss): loss}
        produced: set[int] = set()
        for out, _, _ in self._records:
            produced.add(id(out))
        for out, inputs, backward_fn in reversed(self._records):
            g_out = pending.pop(id(out), None)
            if g_out is None:
                continue
            for inp, g_in in zip(inputs, backward_fn(g_out)):
                if g_in is None or not inp.requires_grad:
                    continue
                key = id(inp)
                acc = pending.get(key)
                pending[key] = g_in if acc is None else acc + g_in
                holders[key] = inp
        result: dict[Tensor, np.ndarray] = {}
        for key, g in pending.items():
            t = holders[key]
            if key in produced or not t.requires_grad:
                continue
            t.grad = g
            result[t] = g
        return result


_TAPE_STACK: list[Tape] = []


def _active_tape() -> Tape | None:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def _coerce(x, dtype) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def _result(out_data: np.ndarray, inputs: tuple[Tensor, ...], backward_fn: BackwardFn) -> Tensor:
    tape = _active_tape()
    if tape is not None and any(i.requires_grad for i in inputs):
        out = Tensor(out_data, requires_grad=True)
        out._tape = tape
        tape._record(out, inputs, backward_fn)
        return out
    return Tensor(out_data)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise arithmetic
# ---------------------------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    out = a.data + b.data

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(out, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = a.data - b.data

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result(out, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data * b.data

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result(out, (a, b), backward)


def div(a: Tensor, b: Tensor) -> Tensor:
    out = a.data / b.data

    def backward(g):
        ga = _unbroadcast(g / b.data, a.shape)
        gb = _unbroadcast(-g * a.data / (b.data * b.data), b.shape)
        return ga, gb

    return _result(out, (a, b), backward)


def neg(a: Tensor) -> Tensor:
    return _result(-a.data, (a,), lambda g: (-g,))


# ---------------------------------------------------------------------------
# linear algebra and shape ops
# ---------------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with stacked leading batch dimensions.

    Shapes follow numpy matmul: (..., m, k) @ (..., k, n) -> (..., m, n).
    Both operands must have ndim >= 2.
    """
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs 2-d operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner extents differ: {a.shape} @ {b.shape}")
    try:
        out = a.data @ b.data
    except ValueError as exc:
        raise ShapeError(f"matmul batch shapes incompatible: {a.shape} @ {b.shape}") from exc

    def backward(g):
        ga = _unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.shape)
        gb = _unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.shape)
        return ga, gb

    return _result(out, (a, b), backward)


def transpose(a: Tensor, axes: Sequence[int] | None = None) -> Tensor:
    axes_t = tuple(axes) if axes is not None else tuple(range(a.ndim))[::-1]
    inverse = tuple(np.argsort(axes_t))
    return _result(np.transpose(a.data, axes_t), (a,), lambda g: (np.transpose(g, inverse),))


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    shape_t = tuple(shape)
    old = a.shape
    return _result(a.data.reshape(shape_t), (a,), lambda g: (g.reshape(old),))


def broadcast_to(a: Tensor, shape: Sequence[int]) -> Tensor:
    shape_t = tuple(shape)
    old = a.shape
    return _result(np.broadcast_to(a.data, shape_t), (a,), lambda g: (_unbroadcast(g, old),))


def concat(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    ts = tuple(tensors)
    if not ts:
        raise ParameterError("concat needs at least one tensor")
    out = np.concatenate([t.data for t in ts], axis=axis)
    cuts = np.cumsum([t.shape[axis] for t in ts])[:-1]

    def backward(g):
        return tuple(np.split(g, cuts, axis=axis))

    return _result(out, ts, backward)


def _along_axis_index(shape: tuple[int, ...], axis: int, index: np.ndarray) -> tuple:
    """Fancy-index tuple selecting ``index`` entries along ``axis``."""
    idx_full = np.broadcast_to(index, shape)
    grids = list(np.indices(shape, sparse=True))
    grids[axis] = idx_full
    return tuple(grids)


def gather(a: Tensor, index: np.ndarray, axis: int) -> Tensor:
    """Select entries along ``axis`` (np.take_along_axis semantics).

    ``index`` is an integer ndarray with index.ndim == a.ndim; non-axis
    dimensions broadcast against ``a``. Backward scatter-adds, so repeated
    indices accumulate correctly.
    """
    index = np.asarray(index)
    if index.ndim != a.ndim:
        raise ShapeError(f"gather index ndim {index.ndim} != tensor ndim {a.ndim}")
    if index.size and (index.min() < 0 or index.max() >= a.shape[axis]):
        raise ContractError(f"gather index out of range for axis extent {a.shape[axis]}")
    out = np.take_along_axis(a.data, index, axis=axis)
    in_shape = a.shape
    out_shape = out.shape

    def backward(g):
        g_in = np.zeros(in_shape, dtype=g.dtype)
        np.add.at(g_in, _along_axis_index(out_shape, axis, index), g)
        return (g_in,)

    return _result(out, (a,), backward)


def scatter(a: Tensor, index: np.ndarray, axis: int, extent: int) -> Tensor:
    """Inverse of gather: place entries of ``a`` along ``axis`` of a zero
    tensor whose extent on that axis is ``extent``. Duplicate indices
    accumulate."""
    index = np.asarray(index)
    if index.ndim != a.ndim:
        raise ShapeError(f"scatter index ndim {index.ndim} != tensor ndim {a.ndim}")
    if index.size and (index.min() < 0 or index.max() >= extent):
        raise ContractError(f"scatter index out of range for extent {extent}")
    out_shape = a.shape[:axis] + (extent,) + a.shape[axis + 1 :]
    out = np.zeros(out_shape, dtype=a.dtype)
    np.add.at(out, _along_axis_index(a.shape, axis, index), a.data)

    def backward(g):
        return (np.take_along_axis(g, np.broadcast_to(index, a.shape), axis=axis),)

    return _result(out, (a,), backward)


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------


def _expand_reduced(g: np.ndarray, shape: tuple[int, ...], axis, keepdims: bool) -> np.ndarray:
    if axis is None:
        return np.broadcast_to(g.reshape((1,) * len(shape)), shape)
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    axes = tuple(ax % len(shape) for ax in axes)
    if not keepdims:
        for ax in sorted(axes):
            g = np.expand_dims(g, ax)
    return np.broadcast_to(g, shape)


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)
    shape = a.shape
    return _result(out, (a,), lambda g: (_expand_reduced(g, shape, axis, keepdims),))


def tmean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.data.mean(axis=axis, keepdims=keepdims)
    shape = a.shape
    if axis is None:
        count = a.data.size
    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        count = int(np.prod([shape[ax % len(shape)] for ax in axes]))

    def backward(g):
        return (_expand_reduced(g, shape, axis, keepdims) / count,)

    return _result(out, (a,), backward)


# ---------------------------------------------------------------------------
# neural-net primitives
# ---------------------------------------------------------------------------


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    """Max-subtracted softmax along ``axis``; slices sum to 1."""
    if not -a.ndim <= axis < a.ndim:
        raise ParameterError(f"softmax axis {axis} invalid for ndim {a.ndim}")
    if not np.isfinite(a.data).all():
        raise NumericError("softmax input contains non-finite values")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - inner),)

    return _result(out, (a,), backward)


def layer_norm(a: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-6) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then scale-shift."""
    if a.shape[-1] < 1:
        raise ShapeError("layer_norm needs a non-empty last axis")
    mu = a.data.mean(axis=-1, keepdims=True)
    centered = a.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    out = xhat * gamma.data + beta.data

    def backward(g):
        d_xhat = g * gamma.data
        m1 = d_xhat.mean(axis=-1, keepdims=True)
        m2 = (d_xhat * xhat).mean(axis=-1, keepdims=True)
        ga = inv * (d_xhat - m1 - xhat * m2)
        g_gamma = _unbroadcast(g * xhat, gamma.shape)
        g_beta = _unbroadcast(g, beta.shape)
        return ga, g_gamma, g_beta

    return _result(out, (a, gamma, beta), backward)


# sqrt(2/pi) and the cubic coefficient of the tanh-form approximation
_GELU_C = 0.7978845608028654
_GELU_K = 0.044715


def gelu(a: Tensor) -> Tensor:
    """Tanh-form approximation: 0.5 x (1 + tanh(c (x + 0.044715 x^3)))."""
    x = a.data
    u = _GELU_C * (x + _GELU_K * x * x * x)
    t = np.tanh(u)
    out = 0.5 * x * (1.0 + t)

    def backward(g):
        du = _GELU_C * (1.0 + 3.0 * _GELU_K * x * x)
        d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du
        return (g * d,)

    return _result(out, (a,), backward)


def dropout(a: Tensor, p: float, training: bool, rng=None) -> Tensor:
    """Zero elements with probability ``p`` and scale survivors by 1/(1-p).

    Identity when not training or p == 0. ``rng`` must be supplied for the
    training path.
    """
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return a
    if rng is None:
        raise ParameterError("dropout in training mode needs an rng")
    keep = (rng.uniform(size=a.shape) >= p).astype(a.dtype)
    scale = np.asarray(1.0 / (1.0 - p), dtype=a.dtype)
    out = a.data * keep * scale

    def backward(g):
        return (g * keep * scale,)

    return _result(out, (a,), backward)


def backward(loss: Tensor) -> dict[Tensor, np.ndarray]:
    """Gradient map for every requires_grad tensor reachable from ``loss``.

    ``loss`` must be a scalar recorded on a tape.
    """
    if loss._tape is None:
        raise ContractError("loss was not recorded on a tape")
    return loss._tape.gradients(loss)
