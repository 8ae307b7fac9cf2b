"""Manifests of (wav, transcript) pairs and the synthetic tone corpus."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dsp
from .ctc import ALPHABET, tokenize
from .errors import InputError

MANIFEST_NAME = "manifest.tsv"

# Words for synthetic sentences; they reuse a small set of letters so a small
# model can learn every character from a short corpus.
SYNTH_WORDS = (
    "a", "at", "on", "no", "to", "tea", "eat", "ate", "ten", "net", "not",
    "ton", "tan", "ant", "cat", "act", "coat", "neat", "toe", "one", "an",
    "it's", "sit", "tin", "nit", "into", "tone", "cone", "once", "tact",
)

CHAR_SECONDS = 0.07
GAP_SECONDS = 0.03
EDGE_SECONDS = 0.05


@dataclass(frozen=True)
class Utterance:
    wav_path: Path
    transcript: str


@dataclass(frozen=True)
class Manifest:
    records: tuple[Utterance, ...]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def texts(self) -> list[str]:
        return [r.transcript for r in self.records]


def load_manifest(path: str | Path) -> Manifest:
    """Read ``wav_path<TAB>transcript`` lines; relative paths resolve next to the file.

    Blank lines and lines starting with ``#`` are skipped.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise InputError(f"{path}: manifest not found") from None
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1].strip():
            raise InputError(f"{path}: line {lineno}: expected 'wav_path<TAB>transcript'")
        wav = Path(parts[0])
        if not wav.is_absolute():
            wav = path.parent / wav
        if not wav.exists():
            raise InputError(f"{path}: line {lineno}: audio file {wav} does not exist")
        try:
            tokenize(parts[1])
        except InputError as exc:
            raise InputError(f"{path}: line {lineno}: {exc}") from None
        records.append(Utterance(wav, parts[1].lower()))
    if not records:
        raise InputError(f"{path}: manifest has no records")
    return Manifest(tuple(records))


def char_tones(ch: str) -> tuple[float, float]:
    """Two formant-like frequencies (Hz) identifying one character."""
    i = ALPHABET.index(ch)
    return 250.0 + 100.0 * i, 3500.0 + 150.0 * ((7 * i) % 28)


def synth_waveform(text: str, rng: np.random.Generator) -> np.ndarray:
    """Render text as a sequence of two-tone bursts separated by short silences."""
    tokenize(text)
    sr = dsp.SAMPLE_RATE
    n_char = int(round(CHAR_SECONDS * sr))
    n_gap = int(round(GAP_SECONDS * sr))
    n_edge = int(round(EDGE_SECONDS * sr))
    t = np.arange(n_char) / sr
    ramp = np.minimum(1.0, np.minimum(np.arange(n_char), np.arange(n_char)[::-1]) / (0.005 * sr))
    pieces = [np.zeros(n_edge)]
    for ch in text.lower():
        f1, f2 = char_tones(ch)
        amp = 0.25 * (1.0 + 0.1 * rng.uniform(-1, 1))
        phase = rng.uniform(0, 2 * np.pi, size=2)
        burst = amp * (np.sin(2 * np.pi * f1 * t + phase[0]) + 0.6 * np.sin(2 * np.pi * f2 * t + phase[1]))
        pieces.append(burst * ramp)
        pieces.append(np.zeros(n_gap))
    pieces.append(np.zeros(n_edge))
    wave = np.concatenate(pieces)
    wave += 0.003 * rng.standard_normal(wave.shape[0])
    return np.clip(wave, -1.0, 1.0 - 1.0 / 32768.0)


def synth_sentence(rng: np.random.Generator, min_words: int = 1, max_words: int = 3) -> str:
    count = int(rng.integers(min_words, max_words + 1))
    return " ".join(SYNTH_WORDS[int(i)] for i in rng.integers(0, len(SYNTH_WORDS), size=count))


def synth_corpus(seed: int, count: int, out_dir: str | Path) -> Manifest:
    """Write ``count`` synthetic utterances and a manifest; same seed, same bytes."""
    if count < 1:
        raise InputError("synthetic corpus needs at least one utterance")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lines = []
    for k in range(count):
        text = synth_sentence(rng)
        name = f"utt{k:05d}.wav"
        dsp.write_wav(out / name, synth_waveform(text, rng))
        lines.append(f"{name}\t{text}")
    (out / MANIFEST_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return load_manifest(out / MANIFEST_NAME)
