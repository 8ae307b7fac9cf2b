"""Token alphabet, CTC posterior and loss, and the greedy decoder.

Token indices are zero-based: ``a``..``z`` are 0..25, apostrophe is 26,
space is 27 and blank is 28 (the 29th token).
"""

from __future__ import annotations

import itertools
import math
import warnings
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import InputError

ALPHABET = "abcdefghijklmnopqrstuvwxyz' "
NUM_TOKENS = 29
BLANK = 28
SPACE = 27
APOSTROPHE = 26

_CHAR_TO_INDEX = {ch: i for i, ch in enumerate(ALPHABET)}

# Loss reported for an unalignable target instead of +inf.
LOSS_CAP = 1.0e4


def tokenize(text: str) -> list[int]:
    """Map text to token indices, lower-casing first.

    Raises:
        InputError: if any character is outside the 28 printable tokens.
    """
    text = text.lower()
    bad = sorted({ch for ch in text if ch not in _CHAR_TO_INDEX})
    if bad:
        raise InputError(f"unsupported character(s): {', '.join(repr(c) for c in bad)}")
    return [_CHAR_TO_INDEX[ch] for ch in text]


def detokenize(tokens: Iterable[int]) -> str:
    out = []
    for t in tokens:
        t = int(t)
        if not 0 <= t < BLANK:
            raise InputError(f"token {t} has no text rendering")
        out.append(ALPHABET[t])
    return "".join(out)


def collapse(path: Iterable[int], blank: int = BLANK) -> list[int]:
    """Merge consecutive duplicates, then drop blanks."""
    out = []
    prev = None
    for t in path:
        t = int(t)
        if t != prev and t != blank:
            out.append(t)
        prev = t
    return out


def min_alignment_length(target: Sequence[int]) -> int:
    """Shortest L for which ``target`` has a valid alignment."""
    repeats = sum(1 for a, b in zip(target, target[1:]) if a == b)
    return len(target) + repeats


def enumerate_alignments(target: Sequence[int], length: int, blank: int = BLANK) -> set[tuple[int, ...]]:
    """Brute-force every length-``length`` path that collapses to ``target``.

    Only the target's own tokens and the blank can appear in a valid path, so
    the search is over that reduced alphabet. Meant as a test oracle.
    """
    target = [int(t) for t in target]
    symbols = sorted(set(target) | {blank})
    return {
        path
        for path in itertools.product(symbols, repeat=length)
        if collapse(path, blank) == target
    }


def _extend(target: Sequence[int], blank: int) -> np.ndarray:
    ext = np.full(2 * len(target) + 1, blank, dtype=np.int64)
    ext[1::2] = np.asarray(target, dtype=np.int64)
    return ext


def _check_probs(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2:
        raise InputError(f"probability matrix must be 2-D, got shape {probs.shape}")
    return probs


def ctc_log_posterior(probs: np.ndarray, target: Sequence[int], blank: int = BLANK) -> float:
    """``log p(target | s)`` by the forward recursion.

    Returns ``-inf`` when the target cannot be aligned in ``len(probs)`` steps.
    """
    probs = _check_probs(probs)
    if probs.shape[0] < min_alignment_length(target):
        return -math.inf
    with np.errstate(divide="ignore"):
        log_probs = np.log(probs)
    alpha, _ = kernels.ctc_forward_backward(log_probs, _extend(target, blank))
    last = alpha[-1]
    return float(np.logaddexp(last[-1], last[-2]) if last.shape[0] > 1 else last[-1])


def ctc_loss(probs: np.ndarray, target: Sequence[int], blank: int = BLANK) -> tuple[float, np.ndarray]:
    """Negative log posterior and its gradient with respect to ``probs``.

    The gradient is ``-occupancy / probs`` where ``occupancy[l, k]`` is the
    posterior probability that step ``l`` emits token ``k``. Composing it with
    a softmax backward gives the familiar ``probs - occupancy`` on logits.

    An unalignable target yields ``LOSS_CAP`` and a zero gradient, with a
    warning.
    """
    probs = _check_probs(probs)
    grad = np.zeros_like(probs)
    if probs.shape[0] < min_alignment_length(target):
        warnings.warn(
            f"target of length {len(target)} cannot align to {probs.shape[0]} steps; loss capped",
            RuntimeWarning,
            stacklevel=2,
        )
        return LOSS_CAP, grad
    ext = _extend(target, blank)
    with np.errstate(divide="ignore"):
        log_probs = np.log(probs)
    alpha, beta = kernels.ctc_forward_backward(log_probs, ext)
    last = alpha[-1]
    log_p = np.logaddexp(last[-1], last[-2]) if last.shape[0] > 1 else last[-1]
    if not np.isfinite(log_p):
        warnings.warn("CTC posterior underflowed to zero; loss capped", RuntimeWarning, stacklevel=2)
        return LOSS_CAP, grad
    # both alpha and beta include the emission at their own step
    with np.errstate(invalid="ignore"):
        log_occ = alpha + beta - log_probs[:, ext] - log_p
    occ_states = np.exp(np.where(np.isnan(log_occ), -np.inf, log_occ))
    occ = np.zeros_like(probs)
    np.add.at(occ.T, ext, occ_states.T)
    np.divide(-occ, probs, out=grad, where=probs > 0)
    return float(-log_p), grad


def ctc_loss_from_logits(logits: np.ndarray, target: Sequence[int], blank: int = BLANK) -> tuple[float, np.ndarray]:
    """Softmax followed by CTC loss, with the gradient taken on the logits.

    Equivalent to ``ctc_loss(softmax(logits))`` composed with the softmax
    backward, but evaluated in log space, so saturated outputs neither
    underflow nor divide by zero. The gradient is ``softmax - occupancy``.
    """
    logits = _check_probs(logits)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    probs = np.exp(log_probs)
    if logits.shape[0] < min_alignment_length(target):
        warnings.warn(
            f"target of length {len(target)} cannot align to {logits.shape[0]} steps; loss capped",
            RuntimeWarning,
            stacklevel=2,
        )
        return LOSS_CAP, np.zeros_like(logits)
    ext = _extend(target, blank)
    alpha, beta = kernels.ctc_forward_backward(log_probs, ext)
    last = alpha[-1]
    log_p = np.logaddexp(last[-1], last[-2]) if last.shape[0] > 1 else last[-1]
    occ = np.zeros_like(logits)
    np.add.at(occ.T, ext, np.exp(alpha + beta - log_probs[:, ext] - log_p).T)
    return float(-log_p), probs - occ


def greedy_path(probs: np.ndarray) -> np.ndarray:
    """Per-step argmax; ``np.argmax`` breaks ties toward the lowest index."""
    return np.argmax(_check_probs(probs), axis=1)


def greedy_decode(probs: np.ndarray, blank: int = BLANK) -> list[int]:
    return collapse(greedy_path(probs), blank)
