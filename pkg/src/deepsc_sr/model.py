"""The semantic transceiver: CNN + BiGRU semantic encoder, dense channel codec.

Shapes for one utterance::

    spectrum (N, F) -> CNN -> (C, L, F) -> (L, C*F) -> BiGRU x Q -> (L, 2H)
        -> dense + softmax -> P (L, 29)
    P -> dense(relu) -> dense -> U (L, 2Z) -> symbols (L*Z, 2) -> power norm
    channel -> equalize -> (L*Z, 2) -> (L, 2Z) -> dense x3 -> softmax -> P_hat
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import channel as chan
from .ctc import NUM_TOKENS
from .errors import InputError, NumericalError
from .tensor import (
    ParameterSet,
    Tensor,
    bidirectional_gru,
    conv2d,
    dense,
    glorot_uniform,
    load_checkpoint,
    passthrough,
    power_normalize,
    relu,
    reshape,
    same_padding,
    save_checkpoint,
    softmax,
    transpose,
)

POWER_TOL = 1e-9


@dataclass(frozen=True)
class ModelConfig:
    """Network geometry. Defaults are a desk-scale shrink of the full architecture."""

    cnn_modules: int = 2
    cnn_filters: int = 8
    cnn_kernel: tuple[int, int] = (3, 3)
    cnn_stride_time: int = 2
    brnn_modules: int = 2
    gru_units: int = 32
    channel_enc_units: tuple[int, ...] = (40, 40)
    channel_dec_units: tuple[int, ...] = (40, 40, 29)
    num_bins: int = 161
    alphabet_size: int = NUM_TOKENS

    def __post_init__(self):
        object.__setattr__(self, "cnn_kernel", tuple(self.cnn_kernel))
        object.__setattr__(self, "channel_enc_units", tuple(self.channel_enc_units))
        object.__setattr__(self, "channel_dec_units", tuple(self.channel_dec_units))
        if self.alphabet_size != NUM_TOKENS:
            raise InputError(f"alphabet_size is fixed at {NUM_TOKENS}")
        if not self.channel_dec_units or self.channel_dec_units[-1] != NUM_TOKENS:
            raise InputError(f"last channel decoder width must be {NUM_TOKENS}")
        if not self.channel_enc_units or self.channel_enc_units[-1] % 2:
            raise InputError("channel encoder output width must be even (2Z)")
        if len(self.cnn_kernel) != 2 or min(self.cnn_kernel) < 1:
            raise InputError(f"bad cnn_kernel {self.cnn_kernel}")
        for name in ("cnn_modules", "cnn_filters", "cnn_stride_time", "brnn_modules", "gru_units", "num_bins"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be >= 1")

    @classmethod
    def paper(cls, **overrides) -> "ModelConfig":
        """The full-size architecture: 2x32-filter CNN, 6x800-unit BiGRU."""
        return cls(**{"cnn_filters": 32, "brnn_modules": 6, "gru_units": 800, **overrides})

    @property
    def symbols_per_step(self) -> int:
        """Z: complex symbols sent per output step."""
        return self.channel_enc_units[-1] // 2

    def output_length(self, num_frames: int) -> int:
        length = num_frames
        for _ in range(self.cnn_modules):
            length = -(-length // self.cnn_stride_time)
        return length

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise InputError(f"unknown model config key(s): {', '.join(unknown)}")
        return cls(**d)


def init_params(cfg: ModelConfig, rng: np.random.Generator) -> ParameterSet:
    """Glorot-uniform weights, zero biases, in a fixed creation order."""
    tensors: dict[str, np.ndarray] = {}
    parts: dict[str, str] = {}

    def put(name, array, part):
        tensors[name] = array
        parts[name] = part

    kh, kw = cfg.cnn_kernel
    c_in = 1
    for i in range(cfg.cnn_modules):
        o = cfg.cnn_filters
        put(f"semantic.conv{i}.w", glorot_uniform(rng, (o, c_in, kh, kw), c_in * kh * kw, o * kh * kw), "alpha")
        put(f"semantic.conv{i}.b", np.zeros(o), "alpha")
        c_in = o
    width = cfg.cnn_filters * cfg.num_bins
    H = cfg.gru_units
    for q in range(cfg.brnn_modules):
        for d in ("fwd", "bwd"):
            pre = f"semantic.gru{q}.{d}"
            put(f"{pre}.W", glorot_uniform(rng, (width, 3 * H), width, 3 * H), "alpha")
            put(f"{pre}.Uzr", glorot_uniform(rng, (H, 2 * H), H, 2 * H), "alpha")
            put(f"{pre}.Uh", glorot_uniform(rng, (H, H), H, H), "alpha")
            put(f"{pre}.b", np.zeros(3 * H), "alpha")
        width = 2 * H
    put("semantic.dense.w", glorot_uniform(rng, (width, NUM_TOKENS), width, NUM_TOKENS), "alpha")
    put("semantic.dense.b", np.zeros(NUM_TOKENS), "alpha")

    width = NUM_TOKENS
    for i, units in enumerate(cfg.channel_enc_units):
        put(f"chenc.dense{i}.w", glorot_uniform(rng, (width, units), width, units), "beta")
        put(f"chenc.dense{i}.b", np.zeros(units), "beta")
        width = units
    width = cfg.channel_enc_units[-1]
    for i, units in enumerate(cfg.channel_dec_units):
        put(f"chdec.dense{i}.w", glorot_uniform(rng, (width, units), width, units), "delta")
        put(f"chdec.dense{i}.b", np.zeros(units), "delta")
        width = units

    return ParameterSet({n: Tensor(a, requires_grad=True, name=n) for n, a in tensors.items()}, parts)


def expected_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    return init_params(cfg, np.random.default_rng(0)).shapes()


def semantic_encode(frames, params: ParameterSet, cfg: ModelConfig) -> Tensor:
    """Normalized spectrum (N, F) to token probabilities (L, 29)."""
    x = frames if isinstance(frames, Tensor) else Tensor(frames)
    if x.data.ndim != 2 or x.shape[1] != cfg.num_bins:
        raise InputError(f"spectrum must be (N, {cfg.num_bins}), got {x.shape}")
    if x.shape[0] < 1 or cfg.output_length(x.shape[0]) < 1:
        raise InputError(f"spectrum with {x.shape[0]} frames is too short for the CNN strides")
    h = reshape(x, (1,) + x.shape)
    kh, kw = cfg.cnn_kernel
    for i in range(cfg.cnn_modules):
        pad = (same_padding(h.shape[1], kh, cfg.cnn_stride_time), same_padding(h.shape[2], kw, 1))
        h = relu(conv2d(h, params[f"semantic.conv{i}.w"], params[f"semantic.conv{i}.b"], (cfg.cnn_stride_time, 1), pad))
    c, length, f = h.shape
    h = reshape(transpose(h, (1, 0, 2)), (length, c * f))
    for q in range(cfg.brnn_modules):
        h = bidirectional_gru(h, params.group(f"semantic.gru{q}.fwd"), params.group(f"semantic.gru{q}.bwd"))
    return softmax(dense(h, params["semantic.dense.w"], params["semantic.dense.b"]))


def channel_encode(probs: Tensor, params: ParameterSet, cfg: ModelConfig) -> Tensor:
    """Probabilities (L, 29) to unit-power symbols, as (L*Z, 2) real pairs."""
    h = probs
    last = len(cfg.channel_enc_units) - 1
    for i in range(len(cfg.channel_enc_units)):
        h = dense(h, params[f"chenc.dense{i}.w"], params[f"chenc.dense{i}.b"])
        if i < last:
            h = relu(h)
    length = h.shape[0]
    return power_normalize(reshape(h, (length * cfg.symbols_per_step, 2)))


def channel_decode_logits(received: Tensor, params: ParameterSet, cfg: ModelConfig) -> Tensor:
    """Equalized (L*Z, 2) symbols to pre-softmax scores (L, 29)."""
    z = cfg.symbols_per_step
    if received.data.ndim != 2 or received.shape[1] != 2 or received.shape[0] % z:
        raise InputError(f"received symbols {received.shape} do not split into steps of {z}")
    h = reshape(received, (received.shape[0] // z, 2 * z))
    last = len(cfg.channel_dec_units) - 1
    for i in range(len(cfg.channel_dec_units)):
        h = dense(h, params[f"chdec.dense{i}.w"], params[f"chdec.dense{i}.b"])
        if i < last:
            h = relu(h)
    return h


def channel_decode(received: Tensor, params: ParameterSet, cfg: ModelConfig) -> Tensor:
    """Equalized (L*Z, 2) symbols back to probabilities (L, 29)."""
    return softmax(channel_decode_logits(received, params, cfg))


def to_complex(pairs: np.ndarray) -> np.ndarray:
    return pairs[:, 0] + 1j * pairs[:, 1]


def to_pairs(symbols: np.ndarray) -> np.ndarray:
    return np.stack([symbols.real, symbols.imag], axis=1)


def mean_power(pairs: np.ndarray) -> float:
    return float((pairs * pairs).sum()) / pairs.shape[0]


@dataclass
class Forward:
    probs: Tensor  # semantic encoder output P
    symbols: Tensor  # transmitted, power-normalized
    received: Tensor  # equalized receiver input
    logits: Tensor  # channel decoder output before the softmax
    gain: complex = field(default=1.0 + 0j)

    @property
    def decoded(self) -> Tensor:
        """P_hat. Built on first access so training can skip it."""
        if self._decoded is None:
            self._decoded = softmax(self.logits)
        return self._decoded

    _decoded: Tensor | None = field(default=None, repr=False)


def forward_e2e(
    frames,
    params: ParameterSet,
    cfg: ModelConfig,
    kind: str = "awgn",
    snr_db: float = math.inf,
    rng: np.random.Generator | None = None,
) -> Forward:
    """Encode, transmit, equalize and decode one utterance.

    The channel sits inside the graph as an identity-Jacobian node: with
    perfect CSI the equalized output is ``x + w / h``, so its derivative with
    respect to ``x`` is exactly one.
    """
    probs = semantic_encode(frames, params, cfg)
    x = channel_encode(probs, params, cfg)
    power = mean_power(x.data)
    if abs(power - 1.0) > POWER_TOL:
        raise NumericalError(f"transmit power {power!r} violates the unit-power constraint")
    if rng is None:
        if snr_db != math.inf:
            raise InputError("a noisy channel needs an explicit random generator")
        rng = np.random.default_rng(0)
    y, h = chan.transmit(to_complex(x.data), kind, snr_db, rng)
    received = passthrough(x, to_pairs(y))
    return Forward(probs, x, received, channel_decode_logits(received, params, cfg), h)


def save_model(path: str | Path, params: ParameterSet, cfg: ModelConfig, extra: dict | None = None) -> None:
    """Write the binary checkpoint plus a ``<path>.json`` sidecar with the config."""
    save_checkpoint(path, params)
    meta = {"model": cfg.to_dict(), **(extra or {})}
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_model(path: str | Path) -> tuple[ParameterSet, ModelConfig]:
    side = Path(str(path) + ".json")
    if not side.exists():
        raise InputError(f"{path}: missing config sidecar {side.name}")
    try:
        meta = json.loads(side.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{side}: invalid JSON ({exc})") from exc
    cfg = ModelConfig.from_dict(meta.get("model", {}))
    arrays = load_checkpoint(path)
    template = init_params(cfg, np.random.default_rng(0))
    want = template.shapes()
    got = {n: a.shape for n, a in arrays.items()}
    if want != got:
        diff = sorted(set(want.items()) ^ set(got.items()))
        raise InputError(f"{path}: checkpoint does not match its config ({diff[:4]} ...)")
    return template.with_data(arrays), cfg
