"""Speech front end: framing, Hamming-windowed log-magnitude spectra, normalization.

Defaults are 20 ms frames with a 10 ms hop at 16 kHz (320 / 160 samples),
which gives 161 frequency bins.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError

SAMPLE_RATE = 16000
FRAME_LEN = 320
HOP = 160
LOG_FLOOR = 1e-10
STD_FLOOR = 1e-8


@dataclass(frozen=True)
class Spectrum:
    frames: np.ndarray  # (N, F)
    frame_len_samples: int
    hop_samples: int

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_bins(self) -> int:
        return self.frames.shape[1]


def hamming(frame_len: int) -> np.ndarray:
    if frame_len == 1:
        return np.ones(1)
    k = np.arange(frame_len)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (frame_len - 1))


def frame_signal(samples: np.ndarray, frame_len: int = FRAME_LEN, hop: int = HOP) -> np.ndarray:
    """Slice ``samples`` into overlapping frames; a trailing partial frame is dropped.

    Returns:
        (N, frame_len) array with N = 1 + (len - frame_len) // hop.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise InputError(f"expected a 1-D sample sequence, got shape {samples.shape}")
    if frame_len < 1 or not 1 <= hop <= frame_len:
        raise InputError(f"need frame_len >= 1 and 1 <= hop <= frame_len, got {frame_len}, {hop}")
    if samples.shape[0] < frame_len:
        raise InputError(f"signal of {samples.shape[0]} samples is shorter than one frame ({frame_len})")
    count = 1 + (samples.shape[0] - frame_len) // hop
    idx = hop * np.arange(count)[:, None] + np.arange(frame_len)[None, :]
    return samples[idx]


def spectrogram(frames: np.ndarray, frame_len: int | None = None, hop: int = HOP) -> Spectrum:
    """Hamming window, real FFT magnitude and log, one row per frame (not normalized)."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] < 1:
        raise InputError(f"expected (N, frame_len) frames, got shape {frames.shape}")
    if frame_len is not None and frames.shape[1] != frame_len:
        raise InputError(f"frames have {frames.shape[1]} samples, expected {frame_len}")
    if not np.isfinite(frames).all():
        raise InputError("non-finite input samples")
    mag = np.abs(np.fft.rfft(frames * hamming(frames.shape[1]), axis=1))
    return Spectrum(np.log(mag + LOG_FLOOR), frames.shape[1], hop)


def normalize_spectrum(raw: Spectrum) -> Spectrum:
    """Per-utterance scalar mean removal and unit-variance scaling."""
    x = raw.frames
    if x.size and x.max() == x.min():
        # mean() of a constant array can round, leaving 1e-16 / STD_FLOOR residue
        return Spectrum(np.zeros_like(x), raw.frame_len_samples, raw.hop_samples)
    std = max(float(x.std()), STD_FLOOR)
    return Spectrum((x - x.mean()) / std, raw.frame_len_samples, raw.hop_samples)


def speech_features(samples: np.ndarray, frame_len: int = FRAME_LEN, hop: int = HOP) -> Spectrum:
    return normalize_spectrum(spectrogram(frame_signal(samples, frame_len, hop), frame_len, hop))


def read_wav(path: str | Path) -> np.ndarray:
    """Read a mono PCM16 16 kHz WAV into floats in [-1, 1)."""
    try:
        with wave.open(str(path), "rb") as w:
            channels, width, rate = w.getnchannels(), w.getsampwidth(), w.getframerate()
            raw = w.readframes(w.getnframes())
    except (wave.Error, EOFError) as exc:
        raise InputError(f"{path}: not a readable WAV file ({exc})") from exc
    if channels != 1:
        raise InputError(f"{path}: expected mono audio, got {channels} channels")
    if width != 2:
        raise InputError(f"{path}: expected 16-bit PCM, got {8 * width}-bit samples")
    if rate != SAMPLE_RATE:
        raise InputError(f"{path}: expected {SAMPLE_RATE} Hz, got {rate} Hz")
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0


def write_wav(path: str | Path, samples: np.ndarray) -> None:
    pcm = np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(SAMPLE_RATE)
        w.writeframes(pcm.tobytes())
