"""Experiment configuration, the training loop and the SNR-sweep evaluations."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import dsp
from .channel import KINDS
from .classic import HuffmanCodebook, PolarCode, TextTransceiver, huffman_build
from .corpus import Manifest
from .ctc import detokenize, greedy_decode, min_alignment_length, tokenize
from .errors import InputError, NumericalError
from .metrics import cer, wer
from .model import ModelConfig, forward_e2e, init_params, load_model, save_model
from .tensor import ParameterSet, Tape, backward, ctc_loss_logits, sgd_step

log = logging.getLogger(__name__)

CSV_HEADER = ("system", "channel", "snr_db", "cer", "wer", "count", "seed")
DEFAULT_SNRS = tuple(float(s) for s in range(-6, 19, 3))
_CHANNEL_CODE = {k: i for i, k in enumerate(KINDS)}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that fixes a training run and its evaluation grid.

    ``batch_size`` and ``learning_rate`` default to the reference 16 and 5e-4.
    Desk-scale corpora usually need a larger step size.
    """

    model: ModelConfig = field(default_factory=ModelConfig)
    train_channel: str = "awgn"
    train_snr_db: float = 8.0
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 0.0005
    seed: int = 0
    shuffle: bool = True
    clip_norm: float | None = None
    converge_tol: float = 0.001
    converge_window: int = 3
    eval_channels: tuple[str, ...] = ("awgn", "rayleigh")
    eval_snrs: tuple[float, ...] = DEFAULT_SNRS
    frame_len: int = dsp.FRAME_LEN
    hop: int = dsp.HOP

    def __post_init__(self):
        object.__setattr__(self, "eval_channels", tuple(self.eval_channels))
        object.__setattr__(self, "eval_snrs", tuple(float(s) for s in self.eval_snrs))
        if self.batch_size < 1:
            raise InputError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise InputError("learning_rate must be positive")
        if self.clip_norm is not None and not self.clip_norm > 0:
            raise InputError("clip_norm must be positive or null")
        if self.epochs < 1:
            raise InputError("epochs must be >= 1")
        if not self.eval_snrs:
            raise InputError("eval_snrs must not be empty")
        for kind in (self.train_channel, *self.eval_channels):
            if kind not in KINDS:
                raise InputError(f"unknown channel kind {kind!r}")
        if self.model.num_bins != self.frame_len // 2 + 1:
            raise InputError(
                f"model.num_bins={self.model.num_bins} does not match frame_len={self.frame_len} "
                f"({self.frame_len // 2 + 1} bins)"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.to_dict()
        d["eval_channels"] = list(self.eval_channels)
        d["eval_snrs"] = [_snr_json(s) for s in self.eval_snrs]
        d["train_snr_db"] = _snr_json(self.train_snr_db)
        return d

    @classmethod
    def from_dict(cls, d: dict, paper_arch: bool = False) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)} | {"paper_arch"}
        unknown = sorted(set(d) - known)
        if unknown:
            raise InputError(f"unknown config key(s): {', '.join(unknown)}")
        d = dict(d)
        paper_arch = bool(d.pop("paper_arch", False)) or paper_arch
        model_d = d.pop("model", {})
        if not isinstance(model_d, dict):
            raise InputError("config key 'model' must be an object")
        frame_len = int(d.get("frame_len", dsp.FRAME_LEN))
        model_d = {"num_bins": frame_len // 2 + 1, **model_d}
        model = ModelConfig.paper(**model_d) if paper_arch else ModelConfig.from_dict(model_d)
        for key in ("train_snr_db",):
            if key in d:
                d[key] = parse_snr(d[key])
        if "eval_snrs" in d:
            d["eval_snrs"] = [parse_snr(s) for s in d["eval_snrs"]]
        try:
            return cls(model=model, **d)
        except TypeError as exc:
            raise InputError(f"bad config: {exc}") from None


def _snr_json(s: float):
    return "inf" if s == math.inf else s


def parse_snr(value) -> float:
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "+inf", "off", "none"):
            return math.inf
        try:
            return float(v)
        except ValueError:
            raise InputError(f"bad SNR value {value!r}") from None
    return float(value)


def parse_snr_grid(text: str) -> list[float]:
    """``-6:18:3`` (inclusive range) or a comma list like ``-6,0,inf``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"SNR range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise InputError(f"empty SNR range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    grid = [parse_snr(p) for p in text.split(",") if p.strip()]
    if not grid:
        raise InputError("SNR grid is empty")
    return grid


def parse_channels(text: str) -> list[str]:
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    for k in kinds:
        if k not in KINDS:
            raise InputError(f"unknown channel kind {k!r}; expected one of {KINDS}")
    if not kinds:
        raise InputError("no channels given")
    return kinds


def load_config(path: str | Path, paper_arch: bool = False) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"{path}: config not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return ExperimentConfig.from_dict(raw, paper_arch=paper_arch)


@dataclass(frozen=True)
class Example:
    frames: np.ndarray
    tokens: tuple[int, ...]
    text: str


def load_examples(manifest: Manifest, frame_len: int = dsp.FRAME_LEN, hop: int = dsp.HOP) -> list[Example]:
    out = []
    for rec in manifest:
        spec = dsp.speech_features(dsp.read_wav(rec.wav_path), frame_len, hop)
        out.append(Example(spec.frames, tuple(tokenize(rec.transcript)), rec.transcript))
    return out


def feasible(example: Example, cfg: ModelConfig) -> bool:
    return cfg.output_length(example.frames.shape[0]) >= min_alignment_length(example.tokens)


@dataclass
class TrainResult:
    params: ParameterSet
    config: ExperimentConfig
    losses: list[float]
    skipped: list[int]
    converged: bool


def _channel_rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, *stream])


def train(
    config: ExperimentConfig,
    data: Manifest | Sequence[Example],
    out: str | Path | None = None,
    on_epoch: Callable[[int, float], None] | None = None,
) -> TrainResult:
    """SGD on the mean CTC loss of each batch, through the training channel.

    Utterances too short for their transcript are skipped with a warning.
    Stops after ``epochs`` or when the epoch loss moves less than
    ``converge_tol`` (relative) across ``converge_window`` epochs.
    """
    examples = load_examples(data, config.frame_len, config.hop) if isinstance(data, Manifest) else list(data)
    cfg = config.model
    skipped = [i for i, ex in enumerate(examples) if not feasible(ex, cfg)]
    for i in skipped:
        warnings.warn(f"utterance {i} is too short for its transcript; skipped", RuntimeWarning, stacklevel=2)
    usable = [i for i in range(len(examples)) if i not in set(skipped)]
    if not usable:
        raise InputError("no usable utterances after skipping unalignable ones")

    params = init_params(cfg, np.random.default_rng(config.seed))
    order_rng = np.random.default_rng([config.seed, 0xC0FFEE])
    losses: list[float] = []
    converged = False
    for epoch in range(config.epochs):
        order = list(order_rng.permutation(usable)) if config.shuffle else list(usable)
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            acc = {n: np.zeros_like(t.data) for n, t in params.items()}
            for idx in batch:
                ex = examples[idx]
                rng = _channel_rng(config.seed, 1, epoch, int(idx))
                with Tape() as tape:
                    fw = forward_e2e(ex.frames, params, cfg, config.train_channel, config.train_snr_db, rng)
                    loss = ctc_loss_logits(fw.logits, ex.tokens)
                value = float(loss.data)
                if not math.isfinite(value):
                    raise NumericalError(f"non-finite loss at epoch {epoch}, utterance {idx}: {value}")
                grads = backward(tape, loss, params.tensors())
                for n in acc:
                    acc[n] += grads[n]
                epoch_losses.append(value)
            for n in acc:
                acc[n] /= len(batch)
                if not np.isfinite(acc[n]).all():
                    raise NumericalError(f"non-finite gradient for {n} at epoch {epoch}")
            if config.clip_norm is not None:
                clip_by_global_norm(acc, config.clip_norm)
            params = sgd_step(params, acc, config.learning_rate)
        mean_loss = float(np.mean(epoch_losses))
        losses.append(mean_loss)
        log.info("epoch %d loss %.6f", epoch, mean_loss)
        if on_epoch is not None:
            on_epoch(epoch, mean_loss)
        w = config.converge_window
        if config.converge_tol > 0 and len(losses) > w:
            ref = losses[-1 - w]
            if abs(losses[-1] - ref) <= config.converge_tol * abs(ref):
                converged = True
                break

    if out is not None:
        save_model(
            out,
            params,
            cfg,
            {
                "experiment": config.to_dict(),
                "history": {"losses": losses, "skipped": skipped, "converged": converged},
            },
        )
    return TrainResult(params, config, losses, skipped, converged)


def clip_by_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Rescale ``grads`` in place so their joint L2 norm is at most ``max_norm``."""
    norm = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if norm > max_norm:
        for g in grads.values():
            g *= max_norm / norm
    return norm


@dataclass(frozen=True)
class ResultRow:
    system: str
    channel: str
    snr_db: float
    cer: float
    wer: float
    count: int
    seed: int


def decode_utterances(
    params: ParameterSet,
    cfg: ModelConfig,
    examples: Sequence[Example],
    kind: str,
    snr_db: float,
    seed: int,
    snr_index: int = 0,
) -> list[str]:
    """Greedy transcripts for each example; noise streams keyed by (seed, channel, SNR, utterance)."""
    out = []
    for u, ex in enumerate(examples):
        rng = _channel_rng(seed, 2, _CHANNEL_CODE[kind], snr_index, u)
        fw = forward_e2e(ex.frames, params, cfg, kind, snr_db, rng)
        out.append(detokenize(greedy_decode(fw.decoded.data)))
    return out


def _score(refs: Sequence[str], hyps: Sequence[str]) -> tuple[float, float]:
    return (
        float(np.mean([cer(r, h) for r, h in zip(refs, hyps)])),
        float(np.mean([wer(r, h) for r, h in zip(refs, hyps)])),
    )


def evaluate(
    model: str | Path | tuple[ParameterSet, ModelConfig],
    data: Manifest | Sequence[Example],
    channels: Iterable[str],
    snrs: Iterable[float],
    seed: int = 0,
    frame_len: int = dsp.FRAME_LEN,
    hop: int = dsp.HOP,
) -> list[ResultRow]:
    """Mean CER/WER of the greedy transcripts for every (channel, SNR) cell."""
    params, cfg = load_model(model) if isinstance(model, (str, Path)) else model
    examples = load_examples(data, frame_len, hop) if isinstance(data, Manifest) else list(data)
    if not examples:
        raise InputError("nothing to evaluate")
    refs = [ex.text for ex in examples]
    rows = []
    for kind in channels:
        for j, snr in enumerate(snrs):
            hyps = decode_utterances(params, cfg, examples, kind, snr, seed, j)
            c, w = _score(refs, hyps)
            rows.append(ResultRow("deepsc-sr", kind, float(snr), c, w, len(examples), seed))
    return rows


def evaluate_baseline(
    data: Manifest | Sequence[str],
    channels: Iterable[str],
    snrs: Iterable[float],
    seed: int = 0,
    codebook: HuffmanCodebook | None = None,
    code: PolarCode | None = None,
) -> list[ResultRow]:
    """The text transceiver fed with ground-truth transcripts."""
    texts = data.texts if isinstance(data, Manifest) else list(data)
    if not texts:
        raise InputError("nothing to evaluate")
    txr = TextTransceiver(codebook or huffman_build(texts), code or PolarCode())
    rows = []
    for kind in channels:
        for j, snr in enumerate(snrs):
            hyps = [txr.run(t, kind, snr, _channel_rng(seed, 3, _CHANNEL_CODE[kind], j, u)) for u, t in enumerate(texts)]
            c, w = _score(texts, hyps)
            rows.append(ResultRow("text-transceiver", kind, float(snr), c, w, len(texts), seed))
    return rows


def _fmt_snr(s: float) -> str:
    return "inf" if s == math.inf else repr(float(s))


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([r.system, r.channel, _fmt_snr(r.snr_db), f"{r.cer:.6f}", f"{r.wer:.6f}", r.count, r.seed])
    return buf.getvalue()


def write_csv(path: str | Path, rows: Iterable[ResultRow]) -> None:
    Path(path).write_text(rows_to_csv(rows))


def with_overrides(config: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(config, **kw)
