"""Reverse-mode differentiation over numpy float64 arrays.

Ops executed while a :class:`Tape` is active are recorded in execution order;
:func:`backward` walks that record in reverse, visiting each node once.
"""

from __future__ import annotations

import contextvars
from typing import Callable, Sequence

import numpy as np

from ..errors import InputError, NumericalError, ShapeError

_active_tape: contextvars.ContextVar["Tape | None"] = contextvars.ContextVar("deepsc_sr_tape", default=None)


class Tensor:
    __slots__ = ("data", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"


class Node:
    __slots__ = ("op", "out", "inputs", "backward")

    def __init__(self, op: str, out: Tensor, inputs: tuple[Tensor, ...], backward: Callable):
        self.op = op
        self.out = out
        self.inputs = inputs
        self.backward = backward


class Tape:
    """Ordered record of the differentiable ops run inside ``with Tape():``."""

    def __init__(self):
        self.nodes: list[Node] = []
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc):
        _active_tape.reset(self._token)
        self._token = None
        return False

    def __len__(self):
        return len(self.nodes)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _emit(op: str, data: np.ndarray, inputs: Sequence[Tensor], backward: Callable) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NumericalError(f"{op}: non-finite values in output")
    out = Tensor(data, requires_grad=any(t.requires_grad for t in inputs))
    tape = _active_tape.get()
    if tape is not None and out.requires_grad:
        tape.nodes.append(Node(op, out, tuple(inputs), backward))
    return out


def backward(tape: Tape, loss: Tensor, wrt: dict[str, Tensor]) -> dict[str, np.ndarray]:
    """Gradients of a scalar ``loss`` for every tensor in ``wrt``.

    Tensors the loss does not depend on get zero gradients.
    """
    if loss.data.size != 1:
        raise InputError(f"backward needs a scalar loss, got shape {loss.shape}")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        g = grads.pop(id(node.out), None)
        if g is None:
            continue
        for inp, gi in zip(node.inputs, node.backward(g)):
            if gi is None or not inp.requires_grad:
                continue
            k = id(inp)
            if k in grads:
                grads[k] = grads[k] + gi
            else:
                grads[k] = gi
    return {name: grads.get(id(t), np.zeros_like(t.data)) for name, t in wrt.items()}


def _same_shape(op: str, a: Tensor, b: Tensor):
    if a.shape != b.shape:
        raise ShapeError(op, a.shape, b.shape)


# -- elementwise -------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return _emit("add", a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return _emit("sub", a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    return _emit("mul", a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data))


def scale(a: Tensor, c: float) -> Tensor:
    return _emit("scale", a.data * c, (a,), lambda g: (g * c,))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return _emit("relu", np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    return _emit("tanh", y, (x,), lambda g: (g * (1.0 - y * y),))


def sigmoid(x: Tensor) -> Tensor:
    # split by sign so exp never overflows
    z = np.exp(-np.abs(x.data))
    y = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return _emit("sigmoid", y, (x,), lambda g: (g * y * (1.0 - y),))


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis, max-subtracted."""
    e = np.exp(x.data - x.data.max(axis=-1, keepdims=True))
    y = e / e.sum(axis=-1, keepdims=True)

    def grad(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return _emit("softmax", y, (x,), grad)


def total(x: Tensor) -> Tensor:
    """Sum of all entries, as a scalar tensor."""
    return _emit("sum", np.asarray(x.data.sum()), (x,), lambda g: (np.full(x.shape, float(g)),))


# -- linear algebra ------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)

    def grad(g):
        ga = g @ b.data.T if a.requires_grad else None
        gb = a.data.T @ g if b.requires_grad else None
        return ga, gb

    return _emit("matmul", a.data @ b.data, (a, b), grad)


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    if b.data.ndim != 1 or x.shape[-1] != b.shape[0]:
        raise ShapeError("add_bias", x.shape, b.shape)
    axes = tuple(range(x.data.ndim - 1))
    return _emit("add_bias", x.data + b.data, (x, b), lambda g: (g, g.sum(axis=axes)))


# -- shape manipulation --------------------------------------------------------

def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    try:
        y = x.data.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", x.shape, shape) from None
    return _emit("reshape", y, (x,), lambda g: (g.reshape(x.shape),))


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    if sorted(axes) != list(range(x.data.ndim)):
        raise ShapeError("transpose", x.shape, axes)
    inv = tuple(np.argsort(axes))
    return _emit("transpose", x.data.transpose(axes), (x,), lambda g: (g.transpose(inv),))


def concat(xs: Sequence[Tensor], axis: int = 0) -> Tensor:
    xs = list(xs)
    if not xs:
        raise InputError("concat of an empty list")
    try:
        y = np.concatenate([t.data for t in xs], axis=axis)
    except ValueError:
        raise ShapeError("concat", *(t.shape for t in xs)) from None
    bounds = np.cumsum([t.shape[axis] for t in xs])[:-1]

    def grad(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _emit("concat", y, xs, grad)


def take(x: Tensor, key) -> Tensor:
    """Basic (non-fancy) indexing: integers and slices only."""
    y = x.data[key]

    def grad(g):
        gx = np.zeros_like(x.data)
        gx[key] = g
        return (gx,)

    return _emit("slice", np.array(y), (x,), grad)


# -- convolution ---------------------------------------------------------------

def same_padding(size: int, kernel: int, stride: int) -> tuple[int, int]:
    """TensorFlow-style 'same' padding: output length ceil(size / stride)."""
    out = -(-size // stride)
    pad = max((out - 1) * stride + kernel - size, 0)
    return pad // 2, pad - pad // 2


def conv2d(
    x: Tensor,
    w: Tensor,
    b: Tensor,
    stride: tuple[int, int] = (1, 1),
    padding: tuple[tuple[int, int], tuple[int, int]] = ((0, 0), (0, 0)),
) -> Tensor:
    """Cross-correlation of a (C, H, W) input with (O, C, kh, kw) kernels."""
    if x.data.ndim != 3 or w.data.ndim != 4 or w.shape[1] != x.shape[0] or b.shape != (w.shape[0],):
        raise ShapeError("conv2d", x.shape, w.shape, b.shape)
    C, H, W = x.shape
    O, _, kh, kw = w.shape
    sh, sw = stride
    (pt, pb), (pl, pr) = padding
    xp = np.pad(x.data, ((0, 0), (pt, pb), (pl, pr)))
    Hp, Wp = xp.shape[1:]
    if Hp < kh or Wp < kw:
        raise ShapeError("conv2d", x.shape, w.shape)
    Ho = (Hp - kh) // sh + 1
    Wo = (Wp - kw) // sw + 1

    def window(i, j):
        return (slice(None), slice(i, i + sh * (Ho - 1) + 1, sh), slice(j, j + sw * (Wo - 1) + 1, sw))

    out = np.zeros((O, Ho * Wo))
    for i in range(kh):
        for j in range(kw):
            out += w.data[:, :, i, j] @ xp[window(i, j)].reshape(C, -1)
    out = out.reshape(O, Ho, Wo) + b.data[:, None, None]

    def grad(g):
        g2 = g.reshape(O, -1)
        gw = np.zeros_like(w.data) if w.requires_grad else None
        gxp = np.zeros_like(xp) if x.requires_grad else None
        for i in range(kh):
            for j in range(kw):
                win = window(i, j)
                if gw is not None:
                    gw[:, :, i, j] = g2 @ xp[win].reshape(C, -1).T
                if gxp is not None:
                    gxp[win] += (w.data[:, :, i, j].T @ g2).reshape(C, Ho, Wo)
        gx = gxp[:, pt:pt + H, pl:pl + W] if gxp is not None else None
        return gx, gw, g.sum(axis=(1, 2))

    return _emit("conv2d", out, (x, w, b), grad)


# -- model-specific ops ----------------------------------------------------------

def power_normalize(x: Tensor) -> Tensor:
    """Scale (n, 2) real pairs so the mean complex-symbol power is one."""
    if x.data.ndim != 2 or x.shape[1] != 2:
        raise ShapeError("power_normalize", x.shape)
    n = x.shape[0]
    power = float((x.data * x.data).sum()) / n
    if not power > 0.0:
        raise NumericalError("power_normalize: all-zero symbols have no defined power")
    s = power ** -0.5
    y = x.data * s

    def grad(g):
        return (s * g - (s ** 3 / n) * x.data * float((g * x.data).sum()),)

    return _emit("power_normalize", y, (x,), grad)


def passthrough(x: Tensor, value: np.ndarray) -> Tensor:
    """Forward ``value``, backward identity into ``x``.

    Models a channel whose output, after equalization, differs from its input
    only by an additive term independent of ``x``.
    """
    value = np.asarray(value, dtype=np.float64)
    if value.shape != x.shape:
        raise ShapeError("passthrough", x.shape, value.shape)
    return _emit("passthrough", value.copy(), (x,), lambda g: (g,))


def ctc_loss(probs: Tensor, target: Sequence[int]) -> Tensor:
    from .. import ctc

    loss, grad = ctc.ctc_loss(probs.data, target)
    return _emit("ctc_loss", np.asarray(loss), (probs,), lambda g: (float(g) * grad,))


def ctc_loss_logits(logits: Tensor, target: Sequence[int]) -> Tensor:
    """Fused softmax + CTC loss on (L, C) logits."""
    from .. import ctc

    loss, grad = ctc.ctc_loss_from_logits(logits.data, target)
    return _emit("ctc_loss_logits", np.asarray(loss), (logits,), lambda g: (float(g) * grad,))
