"""Classical text transceiver used as the comparison baseline."""

from .huffman import (
    SENTINEL,
    HuffmanCodebook,
    TruncatedStream,
    canonical_codes,
    huffman_build,
    huffman_code_lengths,
    huffman_decode,
    huffman_encode,
    symbol_weights,
)
from .polar import PolarCode, bhattacharyya_log, bpsk_llrs, frozen_set_construct, polar_transform
from .qam import constellation, hard_decisions, qam64_demodulate, qam64_modulate
from .transceiver import TextTransceiver, TransmissionReport, text_transceiver_run
