"""Reverse-mode autodiff over numpy arrays.

Small on purpose: only the ops the portrait/value networks need. Graphs are
built eagerly; ``backward`` walks them once in reverse topological order.
Training runs in float32, gradient-check tests construct float64 graphs.
"""

import numpy as np

_GRAD_ENABLED = True


class no_grad:
    """Context manager disabling graph construction (rollouts, target nets)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def grad_enabled():
    return _GRAD_ENABLED


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        if not isinstance(data, np.ndarray):
            data = np.asarray(data, dtype=np.float32)
        self.data = data
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def zero_grad(self):
        self.grad = None

    def detach(self):
        return Tensor(self.data)

    def item(self):
        return float(self.data)

    def backward(self, grad=None):
        """Backpropagate from this node; visits each graph node exactly once."""
        if grad is None:
            grad = np.ones_like(self.data)
        topo = _toposort(self)
        grads = {id(self): grad}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is not None:
                for parent, pg in node._backward(g):
                    if not parent.requires_grad:
                        continue
                    key = id(parent)
                    if parent._backward is None:
                        parent._accumulate(pg)  # leaf
                    elif key in grads:
                        # non-mutating: first contributions may alias sibling buffers
                        grads[key] = grads[key] + pg
                    else:
                        grads[key] = pg
            elif node.requires_grad:
                node._accumulate(g)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def _toposort(root):
    order, visited = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited and p.requires_grad:
                stack.append((p, False))
    return order


def _wrap(x, like=None):
    if isinstance(x, Tensor):
        return x
    dtype = like.data.dtype if like is not None else np.float32
    return Tensor(np.asarray(x, dtype=dtype))


def _make(data, parents, backward):
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, _parents=parents, _backward=backward)
    return Tensor(data)


def _unbroadcast(g, shape):
    """Reduce gradient g to the given (possibly broadcast) operand shape."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# arithmetic


def add(a, b):
    a, b = _wrap(a), _wrap(b, like=a)
    out = a.data + b.data

    def backward(g):
        return ((a, _unbroadcast(g, a.data.shape)), (b, _unbroadcast(g, b.data.shape)))

    return _make(out, (a, b), backward)


def sub(a, b):
    a, b = _wrap(a), _wrap(b, like=a)
    out = a.data - b.data

    def backward(g):
        return ((a, _unbroadcast(g, a.data.shape)), (b, _unbroadcast(-g, b.data.shape)))

    return _make(out, (a, b), backward)


def neg(a):
    def backward(g):
        return ((a, -g),)

    return _make(-a.data, (a,), backward)


def mul(a, b):
    a, b = _wrap(a), _wrap(b, like=a)
    out = a.data * b.data

    def backward(g):
        return (
            (a, _unbroadcast(g * b.data, a.data.shape)),
            (b, _unbroadcast(g * a.data, b.data.shape)),
        )

    return _make(out, (a, b), backward)


def div(a, b):
    a, b = _wrap(a), _wrap(b, like=a)
    out = a.data / b.data

    def backward(g):
        return (
            (a, _unbroadcast(g / b.data, a.data.shape)),
            (b, _unbroadcast(-g * out / b.data, b.data.shape)),
        )

    return _make(out, (a, b), backward)


def matmul(a, b):
    """2-D matrix product; batch dims are flattened by callers."""
    out = a.data @ b.data

    def backward(g):
        return ((a, g @ b.data.T), (b, a.data.T @ g))

    return _make(out, (a, b), backward)


def square(a):
    def backward(g):
        return ((a, g * (2.0 * a.data)),)

    return _make(a.data * a.data, (a,), backward)


def sqrt(a):
    """Square root with a zero subgradient at 0 (keeps Frobenius norms safe)."""
    out = np.sqrt(a.data)

    def backward(g):
        denom = 2.0 * out
        safe = np.where(denom > 0, denom, 1.0)
        return ((a, np.where(denom > 0, g / safe, 0.0)),)

    return _make(out, (a,), backward)


def absolute(a):
    out = np.abs(a.data)

    def backward(g):
        return ((a, g * np.sign(a.data)),)

    return _make(out, (a,), backward)


def exp(a):
    out = np.exp(a.data)

    def backward(g):
        return ((a, g * out),)

    return _make(out, (a,), backward)


def log(a):
    out = np.log(a.data)

    def backward(g):
        return ((a, g / a.data),)

    return _make(out, (a,), backward)


def maximum(a, floor):
    """Elementwise max against a constant; subgradient 1 where a >= floor."""
    out = np.maximum(a.data, floor)

    def backward(g):
        return ((a, g * (a.data >= floor)),)

    return _make(out, (a,), backward)


# ---------------------------------------------------------------------------
# activations


def tanh(a):
    out = np.tanh(a.data)

    def backward(g):
        return ((a, g * (1.0 - out * out)),)

    return _make(out, (a,), backward)


def sigmoid(a):
    out = 1.0 / (1.0 + np.exp(-a.data))

    def backward(g):
        return ((a, g * out * (1.0 - out)),)

    return _make(out, (a,), backward)


def relu(a):
    out = np.maximum(a.data, 0.0)

    def backward(g):
        return ((a, g * (a.data > 0)),)

    return _make(out, (a,), backward)


def elu(a):
    pos = a.data > 0
    out = np.where(pos, a.data, np.expm1(a.data))

    def backward(g):
        return ((a, g * np.where(pos, 1.0, out + 1.0)),)

    return _make(out, (a,), backward)


def softplus(a):
    # log(1 + e^x), computed stably
    out = np.logaddexp(0.0, a.data)

    def backward(g):
        return ((a, g / (1.0 + np.exp(-a.data))),)

    return _make(out, (a,), backward)


def softmax(a, axis=-1):
    """Stable softmax (max subtraction). Rejects non-finite input."""
    if not np.all(np.isfinite(a.data)):
        raise ValueError("softmax input must be finite")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return ((a, out * (g - dot)),)

    return _make(out, (a,), backward)


# ---------------------------------------------------------------------------
# shape / reduction


def reshape(a, shape):
    orig = a.data.shape
    out = a.data.reshape(shape)

    def backward(g):
        return ((a, g.reshape(orig)),)

    return _make(out, (a,), backward)


def swapaxes(a, ax1, ax2):
    out = np.swapaxes(a.data, ax1, ax2)

    def backward(g):
        return ((a, np.swapaxes(g, ax1, ax2)),)

    return _make(out, (a,), backward)


def concat(tensors, axis=-1):
    datas = [t.data for t in tensors]
    out = np.concatenate(datas, axis=axis)
    sizes = [d.shape[axis] for d in datas]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        pieces = []
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            pieces.append((t, g[tuple(idx)]))
        return tuple(pieces)

    return _make(out, tuple(tensors), backward)


def stack(tensors, axis=0):
    out = np.stack([t.data for t in tensors], axis=axis)

    def backward(g):
        return tuple((t, np.take(g, i, axis=axis)) for i, t in enumerate(tensors))

    return _make(out, tuple(tensors), backward)


def tsum(a, axis=None, keepdims=False):
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            return ((a, np.broadcast_to(g, a.data.shape).copy()),)
        if not keepdims:
            g = np.expand_dims(g, axis)
        return ((a, np.broadcast_to(g, a.data.shape).copy()),)

    return _make(out, (a,), backward)


def tmean(a, axis=None, keepdims=False):
    n = a.data.size if axis is None else np.prod(
        [a.data.shape[ax] for ax in (axis if isinstance(axis, tuple) else (axis,))]
    )
    out = a.data.mean(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            return ((a, np.broadcast_to(g / n, a.data.shape).copy()),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return ((a, np.broadcast_to(gg / n, a.data.shape).copy()),)

    return _make(out, (a,), backward)


def take_along(a, indices, axis=-1):
    """Gather one entry per row along ``axis`` (used for chosen-action Q/p)."""
    idx = np.asarray(indices)
    if idx.ndim == a.data.ndim - 1:
        idx = np.expand_dims(idx, axis)
    out = np.take_along_axis(a.data, idx, axis=axis)

    def backward(g):
        ga = np.zeros_like(a.data)
        np.put_along_axis(ga, idx, g, axis=axis)
        return ((a, ga),)

    return _make(out, (a,), backward)


def slice_lastdim(a, lo, hi):
    out = a.data[..., lo:hi]

    def backward(g):
        ga = np.zeros_like(a.data)
        ga[..., lo:hi] = g
        return ((a, ga),)

    return _make(out, (a,), backward)


def gather_rows(a, row_indices):
    """Select rows of a 2-D tensor; duplicate rows accumulate on backward."""
    idx = np.asarray(row_indices)
    out = a.data[idx]

    def backward(g):
        ga = np.zeros_like(a.data)
        np.add.at(ga, idx, g)
        return ((a, ga),)

    return _make(out, (a,), backward)


def expand_tile(a, reps, axis):
    """Repeat along a new axis inserted at ``axis``: shape (..,) -> (.., reps, ..)."""
    expanded = np.expand_dims(a.data, axis)
    out = np.repeat(expanded, reps, axis=axis)

    def backward(g):
        return ((a, g.sum(axis=axis)),)

    return _make(out, (a,), backward)
