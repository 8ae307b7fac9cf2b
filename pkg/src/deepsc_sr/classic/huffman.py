"""Canonical Huffman coding over the 28 text tokens plus an end-of-text sentinel."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..ctc import ALPHABET, BLANK, detokenize, tokenize
from ..errors import InputError

# The blank slot never occurs in text, so it doubles as the sentinel symbol.
SENTINEL = BLANK
NUM_SYMBOLS = len(ALPHABET) + 1


class TruncatedStream(InputError):
    """The bit stream ended before the sentinel; ``partial`` holds what decoded."""

    def __init__(self, partial: str):
        self.partial = partial
        super().__init__(f"bit stream ended without an end-of-text marker after {len(partial)} symbols")


def huffman_code_lengths(weights: Sequence[float]) -> list[int]:
    """Optimal prefix-code lengths.

    Merges break ties by weight, then by the smallest symbol index in each
    subtree, so the result is deterministic.
    """
    if not weights:
        raise InputError("cannot build a code for zero symbols")
    if any(w <= 0 for w in weights):
        raise InputError("all symbol weights must be positive")
    if len(weights) == 1:
        return [1]
    heap = [(float(w), i, [i]) for i, w in enumerate(weights)]
    heapq.heapify(heap)
    lengths = [0] * len(weights)
    while len(heap) > 1:
        w1, k1, s1 = heapq.heappop(heap)
        w2, k2, s2 = heapq.heappop(heap)
        for s in s1 + s2:
            lengths[s] += 1
        heapq.heappush(heap, (w1 + w2, min(k1, k2), s1 + s2))
    return lengths


def canonical_codes(lengths: Mapping[int, int]) -> dict[int, str]:
    """Assign canonical codewords ordered by (length, symbol)."""
    codes: dict[int, str] = {}
    code = 0
    prev = 0
    for sym, length in sorted(lengths.items(), key=lambda kv: (kv[1], kv[0])):
        code <<= length - prev
        codes[sym] = format(code, f"0{length}b")
        code += 1
        prev = length
    return codes


@dataclass(frozen=True)
class HuffmanCodebook:
    lengths: tuple[int, ...]  # indexed by symbol: 0..27 text tokens, 28 sentinel

    def __post_init__(self):
        if len(self.lengths) != NUM_SYMBOLS:
            raise InputError(f"codebook needs {NUM_SYMBOLS} symbol lengths, got {len(self.lengths)}")
        if sum(2.0 ** -n for n in self.lengths) > 1.0 + 1e-12:
            raise InputError("code lengths violate the Kraft inequality")

    @property
    def codes(self) -> dict[int, str]:
        return canonical_codes(dict(enumerate(self.lengths)))

    def to_pairs(self) -> list[tuple[int, int]]:
        return list(enumerate(self.lengths))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "HuffmanCodebook":
        table = dict(pairs)
        if sorted(table) != list(range(NUM_SYMBOLS)):
            raise InputError("codebook pairs must cover every symbol exactly once")
        return cls(tuple(int(table[s]) for s in range(NUM_SYMBOLS)))

    def average_length(self, weights: Sequence[float]) -> float:
        w = np.asarray(weights, dtype=np.float64)
        return float((w * np.asarray(self.lengths)).sum() / w.sum())


def symbol_weights(texts: Iterable[str]) -> list[int]:
    """Token counts with +1 smoothing; the sentinel counts once per text."""
    counts = [1] * NUM_SYMBOLS
    n = 0
    for text in texts:
        n += 1
        for tok in tokenize(text):
            counts[tok] += 1
        counts[SENTINEL] += 1
    if n == 0:
        raise InputError("cannot build a Huffman codebook from an empty corpus")
    return counts


def huffman_build(texts: Iterable[str]) -> HuffmanCodebook:
    return HuffmanCodebook(tuple(huffman_code_lengths(symbol_weights(texts))))


def huffman_encode(text: str, codebook: HuffmanCodebook) -> np.ndarray:
    codes = codebook.codes
    bits = "".join(codes[t] for t in tokenize(text)) + codes[SENTINEL]
    return np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")


def huffman_decode(bits: Iterable[int], codebook: HuffmanCodebook) -> str:
    """Decode up to the sentinel, ignoring any trailing bits.

    Raises:
        TruncatedStream: when no sentinel is found.
    """
    lookup = {code: sym for sym, code in codebook.codes.items()}
    longest = max(codebook.lengths)
    out: list[int] = []
    word = ""
    for b in bits:
        word += "1" if b else "0"
        sym = lookup.get(word)
        if sym is None:
            if len(word) >= longest:  # cannot happen for a complete code
                raise TruncatedStream(detokenize(out))
            continue
        if sym == SENTINEL:
            return detokenize(out)
        out.append(sym)
        word = ""
    raise TruncatedStream(detokenize(out))
