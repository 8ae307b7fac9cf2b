"""Dense, GRU and bidirectional-GRU layers built from the core ops."""

from __future__ import annotations

from typing import Mapping

from ..errors import ShapeError
from .core import Tensor, add, add_bias, concat, matmul, mul, reshape, sigmoid, sub, take, tanh


def dense(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    return add_bias(matmul(x, w), b)


def _gru_step(xz: Tensor, xh: Tensor, h: Tensor, p: Mapping[str, Tensor]) -> Tensor:
    units = h.shape[1]
    zr = sigmoid(add(xz, matmul(h, p["Uzr"])))
    z = take(zr, (slice(None), slice(0, units)))
    r = take(zr, (slice(None), slice(units, 2 * units)))
    cand = tanh(add(xh, matmul(mul(r, h), p["Uh"])))
    # (1 - z) * h + z * cand
    return add(h, mul(z, sub(cand, h)))


def gru_cell(x_t: Tensor, h_prev: Tensor, p: Mapping[str, Tensor]) -> Tensor:
    """One GRU step on row vectors.

    ``p`` holds ``W`` (in, 3H), ``Uzr`` (H, 2H), ``Uh`` (H, H) and ``b`` (3H,),
    with gate columns ordered update, reset, candidate.
    """
    if x_t.data.ndim == 1:
        x_t = reshape(x_t, (1, -1))
    if h_prev.data.ndim == 1:
        h_prev = reshape(h_prev, (1, -1))
    units = p["Uh"].shape[0]
    if x_t.shape[1] != p["W"].shape[0] or h_prev.shape != (1, units):
        raise ShapeError("gru_cell", x_t.shape, h_prev.shape, p["W"].shape)
    proj = dense(x_t, p["W"], p["b"])
    xz = take(proj, (slice(None), slice(0, 2 * units)))
    xh = take(proj, (slice(None), slice(2 * units, 3 * units)))
    return _gru_step(xz, xh, h_prev, p)


def gru_sequence(xs: Tensor, p: Mapping[str, Tensor], reverse: bool = False) -> Tensor:
    """Run a GRU over the rows of ``xs`` (L, in) from a zero state.

    Returns the (L, H) hidden states, indexed by input position whichever way
    the recurrence runs.
    """
    length, width = xs.shape
    units = p["Uh"].shape[0]
    if width != p["W"].shape[0]:
        raise ShapeError("gru_sequence", xs.shape, p["W"].shape)
    proj = dense(xs, p["W"], p["b"])
    xz_all = take(proj, (slice(None), slice(0, 2 * units)))
    xh_all = take(proj, (slice(None), slice(2 * units, 3 * units)))
    h = Tensor([[0.0] * units])
    states: list[Tensor | None] = [None] * length
    steps = range(length - 1, -1, -1) if reverse else range(length)
    for t in steps:
        row = (slice(t, t + 1), slice(None))
        h = _gru_step(take(xz_all, row), take(xh_all, row), h, p)
        states[t] = h
    return concat(states, axis=0)


def bidirectional_gru(xs: Tensor, fwd: Mapping[str, Tensor], bwd: Mapping[str, Tensor]) -> Tensor:
    """Forward and backward GRU states concatenated per step: (L, 2H)."""
    return concat([gru_sequence(xs, fwd), gru_sequence(xs, bwd, reverse=True)], axis=1)
