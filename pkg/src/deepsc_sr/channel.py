"""AWGN and flat Rayleigh fading channels with perfect-CSI equalization.

All randomness comes from an explicit ``numpy.random.Generator``. An SNR of
``math.inf`` switches the noise off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

KINDS = ("awgn", "rayleigh")
FADE_FLOOR = 1e-6


@dataclass(frozen=True)
class ChannelSpec:
    kind: str
    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown channel kind {self.kind!r}; expected one of {KINDS}")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise InputError(f"snr_db must be finite or +inf, got {self.snr_db}")


def snr_to_noise_variance(snr_db: float, signal_power: float = 1.0) -> float:
    """Total complex noise variance for the given SNR; each real part gets half."""
    if signal_power <= 0:
        raise InputError("signal power must be positive")
    if snr_db == math.inf:
        return 0.0
    return signal_power * 10.0 ** (-snr_db / 10.0)


def complex_noise(n: int, variance: float, rng: np.random.Generator) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def awgn_transmit(x: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    var = snr_to_noise_variance(snr_db)
    if var == 0.0:
        return x.copy()
    return x + complex_noise(x.shape[0], var, rng)


def draw_fading(rng: np.random.Generator) -> complex:
    """One CN(0, 1) gain, redrawn while it falls below the deep-fade floor."""
    while True:
        h = complex(rng.standard_normal(), rng.standard_normal()) / math.sqrt(2.0)
        if abs(h) >= FADE_FLOOR:
            return h


def rayleigh_transmit(x: np.ndarray, snr_db: float, rng: np.random.Generator) -> tuple[np.ndarray, complex]:
    """Flat fading: one gain for the whole block, returned as CSI."""
    x = np.asarray(x, dtype=np.complex128)
    h = draw_fading(rng)
    y = h * x
    var = snr_to_noise_variance(snr_db)
    if var > 0.0:
        y = y + complex_noise(x.shape[0], var, rng)
    return y, h


def equalize(y: np.ndarray, h: complex) -> np.ndarray:
    if abs(h) < FADE_FLOOR:
        raise InputError(f"|h| = {abs(h):.3g} is below the equalizer floor")
    return np.asarray(y, dtype=np.complex128) / h


def transmit(x: np.ndarray, kind: str, snr_db: float, rng: np.random.Generator) -> tuple[np.ndarray, complex]:
    """Send ``x`` through the channel and return (equalized receiver input, gain)."""
    if kind == "awgn":
        return awgn_transmit(x, snr_db, rng), 1.0 + 0j
    if kind == "rayleigh":
        y, h = rayleigh_transmit(x, snr_db, rng)
        return equalize(y, h), h
    raise InputError(f"unknown channel kind {kind!r}")
