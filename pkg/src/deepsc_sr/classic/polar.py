"""Polar codes in natural order with Bhattacharyya construction and SCL decoding.

The codeword is ``x = u F^{(x)n}`` with kernel ``F = [[1, 0], [1, 1]]`` and no
bit-reversal permutation. In that order the first half of ``u`` sees the
degraded channel and the second half the upgraded one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import InputError


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Multiply a bit vector by the n-fold Kronecker power of the kernel over GF(2)."""
    x = np.array(u, dtype=np.uint8)
    N = x.shape[-1]
    h = 1
    while h < N:
        v = x.reshape(-1, N // (2 * h), 2, h)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        h *= 2
    return x


def bhattacharyya_log(n_code: int, design_snr_db: float) -> np.ndarray:
    """Log Bhattacharyya parameters of the synthesized bit channels.

    The base channel is BPSK on AWGN at ``design_snr_db`` (Es/N0), whose
    parameter is ``exp(-snr)``. Works in the log domain so no index underflows.
    """
    logz = np.array([-(10.0 ** (design_snr_db / 10.0))])
    while logz.shape[0] < n_code:
        worse = logz + np.log(2.0 - np.exp(logz))  # 2z - z^2
        better = 2.0 * logz  # z^2
        logz = np.stack([worse, better], axis=1).ravel()
    return logz


def frozen_set_construct(n_code: int, k_code: int, design_snr_db: float = 2.0) -> np.ndarray:
    """Sorted indices of the ``n_code - k_code`` least reliable bit channels."""
    if n_code < 1 or n_code & (n_code - 1):
        raise InputError(f"block length must be a power of two, got {n_code}")
    if not 0 <= k_code <= n_code:
        raise InputError(f"need 0 <= K <= N, got K={k_code}, N={n_code}")
    order = np.argsort(bhattacharyya_log(n_code, design_snr_db), kind="stable")
    return np.sort(order[k_code:])


@dataclass(frozen=True)
class PolarCode:
    n_code: int = 512
    k_code: int = 256
    list_size: int = 4
    design_snr_db: float = 2.0
    frozen: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.list_size < 1:
            raise InputError("list size must be >= 1")
        frozen = frozen_set_construct(self.n_code, self.k_code, self.design_snr_db)
        mask = np.zeros(self.n_code, dtype=np.uint8)
        mask[frozen] = 1
        object.__setattr__(self, "frozen", frozen)
        object.__setattr__(self, "_mask", mask)
        object.__setattr__(self, "_info", np.flatnonzero(mask == 0))

    @property
    def frozen_mask(self) -> np.ndarray:
        return self._mask

    @property
    def info_positions(self) -> np.ndarray:
        return self._info

    def encode(self, info_bits) -> np.ndarray:
        info_bits = np.asarray(info_bits, dtype=np.uint8)
        if info_bits.shape != (self.k_code,):
            raise InputError(f"expected {self.k_code} information bits, got {info_bits.shape}")
        u = np.zeros(self.n_code, dtype=np.uint8)
        u[self._info] = info_bits
        return polar_transform(u)

    def decode(self, llrs, list_size: int | None = None) -> np.ndarray:
        """SCL decoding without CRC: the path with the smallest metric wins."""
        llrs = np.asarray(llrs, dtype=np.float64)
        if llrs.shape != (self.n_code,):
            raise InputError(f"expected {self.n_code} LLRs, got {llrs.shape}")
        size = self.list_size if list_size is None else list_size
        u = kernels.polar_scl_decode(llrs, self._mask, size)
        return u[self._info]

    @property
    def rate(self) -> float:
        return self.k_code / self.n_code


def bpsk_llrs(bits: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Channel LLRs for BPSK (0 -> +1) on real AWGN at Es/N0 = ``snr_db``."""
    snr = 10.0 ** (snr_db / 10.0)
    sigma2 = 1.0 / (2.0 * snr)
    y = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64) + math.sqrt(sigma2) * rng.standard_normal(len(bits))
    return 2.0 * y / sigma2
