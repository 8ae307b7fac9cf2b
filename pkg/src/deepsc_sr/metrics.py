"""Character and word error rates from minimum edit alignments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

from . import kernels
from .errors import InputError


@dataclass(frozen=True)
class EditCounts:
    substitutions: int
    deletions: int
    insertions: int
    ref_length: int

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        if self.ref_length == 0:
            raise InputError("error rate undefined for an empty reference")
        return self.distance / self.ref_length


def _encode_pair(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> tuple[list[int], list[int]]:
    vocab: dict[Hashable, int] = {}
    r = [vocab.setdefault(x, len(vocab)) for x in ref]
    h = [vocab.setdefault(x, len(vocab)) for x in hyp]
    return r, h


def edit_counts(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> EditCounts:
    """Unit-cost edit counts from one minimal alignment.

    The backtrace prefers substitution (or match), then insertion, then
    deletion, so the split between S, D and I is reproducible.
    """
    r, h = _encode_pair(ref, hyp)
    s, d, i = kernels.edit_counts(r, h)
    return EditCounts(s, d, i, len(r))


def split_words(text: str) -> list[str]:
    """Split on the space token; empty fields from repeated spaces are dropped."""
    return [w for w in text.split(" ") if w]


def cer(ref_text: str, hyp_text: str) -> float:
    """Character error rate. Spaces and apostrophes count as characters."""
    if not ref_text:
        raise InputError("CER undefined for an empty reference")
    return edit_counts(list(ref_text), list(hyp_text)).rate


def wer(ref_text: str, hyp_text: str) -> float:
    ref_words = split_words(ref_text)
    if not ref_words:
        raise InputError("WER undefined for a reference with no words")
    return edit_counts(ref_words, split_words(hyp_text)).rate
