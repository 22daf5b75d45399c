"""Dense float64 arrays with taped reverse-mode differentiation.

Forward math runs on plain numpy. While a :class:`GradientTape` is active,
every operation appends its output node (with vector-Jacobian callbacks) to
the tape; ``tape.backward(loss)`` then walks the recorded nodes in reverse
creation order, which is a reverse topological order by construction, and
accumulates adjoints into every participating leaf. Without an active tape
the same operations are value-only, which is what inference uses.

Tensors produced by operations are treated as immutable. Optimizers mutate
leaf ``.data`` buffers in place between tapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class NonFiniteError(FloatingPointError):
    """An operation produced NaN or Inf values."""


_TAPE_STACK: list["GradientTape"] = []


def _active_tape():
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def _check_finite(arr: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{op} produced non-finite values")


class Tensor:
    __slots__ = ("data", "grad", "_links")

    def __init__(self, data):
        arr = np.array(data, dtype=np.float64, copy=True)
        _check_finite(arr, "tensor construction")
        self.data = arr
        self.grad = np.zeros_like(arr)
        self._links: tuple = ()

    # -- construction used by operations (skips the defensive copy) --------
    @classmethod
    def _from_op(cls, data: np.ndarray, links, op: str) -> "Tensor":
        _check_finite(data, op)
        out = cls.__new__(cls)
        out.data = data
        out.grad = np.zeros_like(data)
        out._links = tuple(links)
        tape = _active_tape()
        if tape is not None:
            tape._nodes.append(out)
        return out

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def __repr__(self):
        return f"Tensor(shape={self.shape})"

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        data = self.data[key]
        if np.isscalar(data) or data.ndim == 0:
            data = np.asarray(data)
        else:
            data = data.copy()
        shape = self.data.shape

        def vjp(g, key=key, shape=shape):
            full = np.zeros(shape)
            full[key] = g
            return full

        return Tensor._from_op(data, [(self, vjp)], "slice")

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.data.shape
        out = self.data.reshape(shape)
        return Tensor._from_op(out.copy(), [(self, lambda g: g.reshape(old))], "reshape")

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)


class GradientTape:
    """Records operations for one forward pass; replays adjoints backward."""

    def __init__(self):
        self._nodes: list[Tensor] = []

    def __enter__(self):
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _TAPE_STACK.pop()
        assert popped is self
        return False

    def backward(self, loss: Tensor) -> None:
        """Seed the loss adjoint with 1 and push adjoints to all leaves.

        Leaves that did not participate in the loss keep their (zeroed)
        gradient buffers untouched.
        """
        if loss.size != 1:
            raise ShapeError(f"backward expects a scalar loss, got shape {loss.shape}")
        loss.grad = np.ones_like(loss.data)
        for node in reversed(self._nodes):
            g = node.grad
            if not node._links or not g.any():
                continue
            for parent, vjp in node._links:
                parent.grad += vjp(g)


# ---------------------------------------------------------------------------
# helpers

def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, ss) in enumerate(zip(g.shape, shape)) if ss == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _operand(x):
    """Split an operand into (raw array, Tensor or None)."""
    if isinstance(x, Tensor):
        return x.data, x
    return np.asarray(x, dtype=np.float64), None


def _binary(a, b, fwd, vjp_a, vjp_b, op: str):
    da, ta = _operand(a)
    db, tb = _operand(b)
    out = fwd(da, db)
    links = []
    if ta is not None:
        links.append((ta, lambda g: _unbroadcast(vjp_a(g, da, db), da.shape)))
    if tb is not None:
        links.append((tb, lambda g: _unbroadcast(vjp_b(g, da, db), db.shape)))
    return Tensor._from_op(out, links, op)


# ---------------------------------------------------------------------------
# primitives

def add(a, b):
    return _binary(a, b, lambda x, y: x + y,
                   lambda g, x, y: g, lambda g, x, y: g, "add")


def sub(a, b):
    return _binary(a, b, lambda x, y: x - y,
                   lambda g, x, y: g, lambda g, x, y: -g, "sub")


def mul(a, b):
    return _binary(a, b, lambda x, y: x * y,
                   lambda g, x, y: g * y, lambda g, x, y: g * x, "mul")


def div(a, b):
    return _binary(a, b, lambda x, y: x / y,
                   lambda g, x, y: g / y, lambda g, x, y: -g * x / (y * y), "div")


def matmul(a, b):
    da, ta = _operand(a)
    db, tb = _operand(b)
    if da.ndim != 2 or db.ndim != 2 or da.shape[1] != db.shape[0]:
        raise ShapeError(f"matmul requires (p,q) @ (q,r), got {da.shape} and {db.shape}")
    out = da @ db
    links = []
    if ta is not None:
        links.append((ta, lambda g: g @ db.T))
    if tb is not None:
        links.append((tb, lambda g: da.T @ g))
    return Tensor._from_op(out, links, "matmul")


def concat(tensors, axis: int = 0):
    arrs = [t.data if isinstance(t, Tensor) else np.asarray(t, dtype=np.float64) for t in tensors]
    out = np.concatenate(arrs, axis=axis)
    links = []
    offset = 0
    for t, arr in zip(tensors, arrs):
        width = arr.shape[axis]
        if isinstance(t, Tensor):
            sl = [slice(None)] * out.ndim
            sl[axis] = slice(offset, offset + width)
            links.append((t, lambda g, sl=tuple(sl): g[sl]))
        offset += width
    return Tensor._from_op(out, links, "concat")


def _reduce_count(shape, axis):
    if axis is None:
        return int(np.prod(shape)) if shape else 1
    if isinstance(axis, int):
        axis = (axis,)
    return int(np.prod([shape[a] for a in axis]))


def _expand_reduced(g, shape, axis, keepdims):
    """Broadcast a reduced gradient back to the pre-reduction shape."""
    if axis is None:
        return np.broadcast_to(g, shape).copy()
    if not keepdims:
        ax = (axis,) if isinstance(axis, int) else tuple(axis)
        ax = tuple(a % len(shape) for a in ax)
        for a in sorted(ax):
            g = np.expand_dims(g, a)
    return np.broadcast_to(g, shape).copy()


def tsum(x: Tensor, axis=None, keepdims=False):
    shape = x.data.shape
    out = x.data.sum(axis=axis, keepdims=keepdims)
    out = np.asarray(out)
    return Tensor._from_op(out, [(x, lambda g: _expand_reduced(g, shape, axis, keepdims))], "sum")


def tmean(x: Tensor, axis=None, keepdims=False):
    shape = x.data.shape
    count = _reduce_count(shape, axis)
    out = np.asarray(x.data.mean(axis=axis, keepdims=keepdims))
    return Tensor._from_op(
        out, [(x, lambda g: _expand_reduced(g, shape, axis, keepdims) / count)], "mean"
    )


def exp(x: Tensor):
    out = np.exp(x.data)
    return Tensor._from_op(out, [(x, lambda g: g * out)], "exp")


def log(x: Tensor):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(x.data)
    return Tensor._from_op(out, [(x, lambda g: g / x.data)], "log")


def tanh(x: Tensor):
    out = np.tanh(x.data)
    return Tensor._from_op(out, [(x, lambda g: g * (1.0 - out * out))], "tanh")


def sigmoid(x: Tensor):
    with np.errstate(over="ignore"):
        out = np.where(x.data >= 0, 1.0 / (1.0 + np.exp(-x.data)),
                       np.exp(x.data) / (1.0 + np.exp(x.data)))
    return Tensor._from_op(out, [(x, lambda g: g * out * (1.0 - out))], "sigmoid")


def relu(x: Tensor):
    out = np.maximum(x.data, 0.0)
    return Tensor._from_op(out, [(x, lambda g: g * (x.data > 0))], "relu")


def leaky_relu(x: Tensor, alpha: float = 0.2):
    out = np.where(x.data > 0, x.data, alpha * x.data)
    return Tensor._from_op(
        out, [(x, lambda g: g * np.where(x.data > 0, 1.0, alpha))], "leaky_relu"
    )


def clip(x: Tensor, lo: float, hi: float):
    """Clamp values; gradient is passed through only inside [lo, hi]."""
    out = np.clip(x.data, lo, hi)
    inside = (x.data >= lo) & (x.data <= hi)
    return Tensor._from_op(out, [(x, lambda g: g * inside)], "clip")


def softmax(x: Tensor, axis: int = -1):
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        return out * (g - (g * out).sum(axis=axis, keepdims=True))

    return Tensor._from_op(out, [(x, vjp)], "softmax")


def log_softmax(x: Tensor, axis: int = -1):
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    soft = np.exp(out)

    def vjp(g):
        return g - soft * g.sum(axis=axis, keepdims=True)

    return Tensor._from_op(out, [(x, vjp)], "log_softmax")


def logsumexp(x: Tensor, axis: int = -1, keepdims: bool = False):
    m = x.data.max(axis=axis, keepdims=True)
    e = np.exp(x.data - m)
    s = e.sum(axis=axis, keepdims=True)
    out = np.log(s) + m
    soft = e / s
    if not keepdims:
        out = np.asarray(out.squeeze(axis=axis))

    def vjp(g):
        gk = g if keepdims else np.expand_dims(g, axis)
        return soft * gk

    return Tensor._from_op(out, [(x, vjp)], "logsumexp")


# ---------------------------------------------------------------------------
# optimization

class Adam:
    """Adam with bias correction over a list of leaf tensors.

    Rejects a step when any gradient is non-finite: the error is raised
    before any state is touched, so parameters and moments are unchanged.
    """

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        for p in self.params:
            if not np.all(np.isfinite(p.grad)):
                raise NonFiniteError("adam step rejected: non-finite gradient")
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1 ** t)
            v_hat = v / (1 - b2 ** t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()


# ---------------------------------------------------------------------------
# verification

@dataclass
class GradCheckResult:
    tol: float
    per_param: dict = field(default_factory=dict)

    @property
    def max_rel_error(self) -> float:
        return max(self.per_param.values()) if self.per_param else 0.0

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tol


def _rel_error(a: float, n: float) -> float:
    return abs(a - n) / max(1.0, abs(a), abs(n))


def gradient_check(loss_fn, params, h: float = 1e-5, tol: float = 1e-4) -> GradCheckResult:
    """Compare analytic gradients against central finite differences.

    ``loss_fn`` must rebuild the computation from the current ``.data``
    of the given parameters and be deterministic across calls. Relative
    error uses a unit floor in the denominator so near-zero gradients are
    compared absolutely.
    """
    if isinstance(params, dict):
        named = list(params.items())
    else:
        named = [(f"param{i}", p) if isinstance(p, Tensor) else p for i, p in enumerate(params)]

    for _, p in named:
        p.zero_grad()
    with GradientTape() as tape:
        loss = loss_fn()
    tape.backward(loss)
    analytic = {name: p.grad.copy() for name, p in named}

    result = GradCheckResult(tol=tol)
    for name, p in named:
        worst = 0.0
        flat = p.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = loss_fn().item()
            flat[i] = orig - h
            f_minus = loss_fn().item()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            worst = max(worst, _rel_error(analytic[name].reshape(-1)[i], numeric))
        result.per_param[name] = worst
    return result
