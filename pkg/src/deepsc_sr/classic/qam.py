"""Gray-mapped square 64-QAM with max-log (or exact) soft demodulation."""

from __future__ import annotations

import math

import numpy as np

BITS_PER_SYMBOL = 6
SCALE = 1.0 / math.sqrt(42.0)
NOISE_FLOOR = 1e-12

# level index k -> amplitude 2k - 7; its 3-bit label is the Gray code of k
_LEVELS = np.arange(-7.0, 8.0, 2.0) * SCALE
_LABELS = np.arange(8) ^ (np.arange(8) >> 1)
_LEVEL_OF_LABEL = np.argsort(_LABELS)
# _BIT[b, k]: bit b (MSB first) of the label at level k
_BIT = (_LABELS[None, :] >> (2 - np.arange(3))[:, None]) & 1


def constellation() -> np.ndarray:
    """All 64 points indexed by their 6-bit label (I bits high, Q bits low)."""
    labels = np.arange(64)
    i = _LEVELS[_LEVEL_OF_LABEL[labels >> 3]]
    q = _LEVELS[_LEVEL_OF_LABEL[labels & 7]]
    return i + 1j * q


def pad_bits(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    extra = (-len(bits)) % BITS_PER_SYMBOL
    return np.concatenate([bits, np.zeros(extra, dtype=np.uint8)]) if extra else bits


def qam64_modulate(bits) -> np.ndarray:
    """Bits to unit-energy symbols; zero-pads to a multiple of six bits."""
    groups = pad_bits(bits).reshape(-1, BITS_PER_SYMBOL).astype(np.int64)
    weights = 1 << np.arange(BITS_PER_SYMBOL - 1, -1, -1)
    return constellation()[groups @ weights]


def _axis_llrs(v: np.ndarray, noise_var: float, exact: bool) -> np.ndarray:
    metric = -((v[:, None] - _LEVELS[None, :]) ** 2) / noise_var  # (n, 8)
    out = np.empty((v.shape[0], 3))
    for b in range(3):
        ones = _BIT[b] == 1
        if exact:
            from scipy.special import logsumexp

            out[:, b] = logsumexp(metric[:, ~ones], axis=1) - logsumexp(metric[:, ones], axis=1)
        else:
            out[:, b] = metric[:, ~ones].max(axis=1) - metric[:, ones].max(axis=1)
    return out


def qam64_demodulate(symbols, noise_var: float, exact: bool = False) -> np.ndarray:
    """Per-bit LLRs, positive favouring 0.

    ``noise_var`` is the total complex noise variance (half per real axis).
    """
    y = np.asarray(symbols, dtype=np.complex128)
    nv = max(float(noise_var), NOISE_FLOOR)
    llr_i = _axis_llrs(y.real, nv, exact)
    llr_q = _axis_llrs(y.imag, nv, exact)
    return np.concatenate([llr_i, llr_q], axis=1).ravel()


def hard_decisions(llrs) -> np.ndarray:
    return (np.asarray(llrs) < 0).astype(np.uint8)
