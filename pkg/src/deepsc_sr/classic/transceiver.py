"""Text transceiver baseline: Huffman -> polar -> 64-QAM -> channel -> back.

The speech recognizer in front of this pipeline is taken to be perfect, so
the input is the reference transcript itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import channel as chan
from ..errors import InputError
from .huffman import HuffmanCodebook, TruncatedStream, huffman_decode, huffman_encode
from .polar import PolarCode
from .qam import BITS_PER_SYMBOL, qam64_demodulate, qam64_modulate


@dataclass
class TransmissionReport:
    text: str
    truncated: bool
    blocks: int
    bit_errors: int


@dataclass
class TextTransceiver:
    codebook: HuffmanCodebook
    code: PolarCode = field(default_factory=PolarCode)
    exact_llr: bool = False

    def _blocks(self, bits: np.ndarray) -> np.ndarray:
        k = self.code.k_code
        padded = np.zeros(-(-len(bits) // k) * k, dtype=np.uint8)
        padded[: len(bits)] = bits
        return padded.reshape(-1, k)

    def transmit(self, text: str, kind: str, snr_db: float, rng: np.random.Generator) -> TransmissionReport:
        source = huffman_encode(text, self.codebook)
        info = self._blocks(source)
        coded = np.concatenate([self.code.encode(b) for b in info])
        tx = qam64_modulate(coded)
        rx, h = chan.transmit(tx, kind, snr_db, rng)
        noise_var = chan.snr_to_noise_variance(snr_db) / abs(h) ** 2
        llrs = qam64_demodulate(rx, noise_var, exact=self.exact_llr)[: len(coded)]
        n = self.code.n_code
        decoded = np.concatenate([self.code.decode(llrs[i * n:(i + 1) * n]) for i in range(len(info))])
        errors = int(np.count_nonzero(decoded != info.ravel()))
        try:
            return TransmissionReport(huffman_decode(decoded, self.codebook), False, len(info), errors)
        except TruncatedStream as exc:
            return TransmissionReport(exc.partial, True, len(info), errors)

    def run(self, text: str, kind: str, snr_db: float, rng: np.random.Generator) -> str:
        return self.transmit(text, kind, snr_db, rng).text


def text_transceiver_run(
    text: str,
    spec: chan.ChannelSpec,
    codebook: HuffmanCodebook,
    code: PolarCode | None = None,
) -> str:
    """One-shot run seeded from ``spec.seed``."""
    txr = TextTransceiver(codebook, code or PolarCode())
    return txr.run(text, spec.kind, spec.snr_db, np.random.default_rng(spec.seed))


def symbols_per_text(num_bits: int, code: PolarCode) -> int:
    blocks = -(-num_bits // code.k_code)
    return math.ceil(blocks * code.n_code / BITS_PER_SYMBOL)
