"""Named parameter sets, initialization, SGD and the binary checkpoint format."""

from __future__ import annotations

import math
import struct
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from ..errors import InputError
from .core import Tensor

PARTITIONS = ("alpha", "beta", "delta")
MAGIC = b"DSCSR1"


class ParameterSet:
    """Ordered map of parameter name to tensor, each tagged with a partition.

    Partitions follow the transceiver blocks: ``alpha`` semantic encoder,
    ``beta`` channel encoder, ``delta`` channel decoder.
    """

    def __init__(self, tensors: Mapping[str, Tensor], partitions: Mapping[str, str]):
        if set(tensors) != set(partitions):
            missing = set(tensors) ^ set(partitions)
            raise InputError(f"partition labels do not cover parameters: {sorted(missing)}")
        for name, label in partitions.items():
            if label not in PARTITIONS:
                raise InputError(f"{name}: unknown partition {label!r}")
        self._tensors = dict(tensors)
        self._partitions = {name: partitions[name] for name in self._tensors}

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self):
        return self._tensors.items()

    def tensors(self) -> dict[str, Tensor]:
        return dict(self._tensors)

    def partition_of(self, name: str) -> str:
        return self._partitions[name]

    def partition(self, label: str) -> list[str]:
        return [n for n, p in self._partitions.items() if p == label]

    def shapes(self) -> dict[str, tuple[int, ...]]:
        return {n: t.shape for n, t in self._tensors.items()}

    def size(self) -> int:
        return sum(t.data.size for t in self._tensors.values())

    def group(self, prefix: str) -> dict[str, Tensor]:
        """Tensors under ``prefix.``, keyed by the remaining suffix."""
        cut = len(prefix) + 1
        return {n[cut:]: t for n, t in self._tensors.items() if n.startswith(prefix + ".")}

    def with_data(self, arrays: Mapping[str, np.ndarray]) -> "ParameterSet":
        tensors = {n: Tensor(np.array(arrays[n], dtype=np.float64), requires_grad=True, name=n) for n in self._tensors}
        return ParameterSet(tensors, self._partitions)


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def sgd_step(params: ParameterSet, grads: Mapping[str, np.ndarray], lr: float) -> ParameterSet:
    """Plain SGD: ``theta <- theta - lr * grad`` for every parameter."""
    if not lr > 0:
        raise InputError(f"learning rate must be positive, got {lr}")
    missing = [n for n in params if n not in grads]
    if missing:
        raise KeyError(f"no gradient for parameter(s): {', '.join(missing)}")
    return params.with_data({n: t.data - lr * grads[n] for n, t in params.items()})


def save_checkpoint(path: str | Path, params: ParameterSet) -> None:
    """Write the binary checkpoint.

    Layout: ``DSCSR1`` then, per parameter, uint32 name length, UTF-8 name,
    uint32 rank, uint32 dims, and the values as little-endian float64.
    """
    chunks = [MAGIC]
    for name, t in params.items():
        raw = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(raw)))
        chunks.append(raw)
        chunks.append(struct.pack(f"<I{t.data.ndim}I", t.data.ndim, *t.shape))
        chunks.append(np.ascontiguousarray(t.data, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_checkpoint(path: str | Path) -> dict[str, np.ndarray]:
    blob = Path(path).read_bytes()
    if not blob.startswith(MAGIC):
        raise InputError(f"{path}: not a DSCSR1 checkpoint")
    pos = len(MAGIC)
    out: dict[str, np.ndarray] = {}
    try:
        while pos < len(blob):
            (nlen,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            name = blob[pos:pos + nlen].decode("utf-8")
            pos += nlen
            (rank,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            dims = struct.unpack_from(f"<{rank}I", blob, pos)
            pos += 4 * rank
            count = int(np.prod(dims)) if rank else 1
            end = pos + 8 * count
            if end > len(blob):
                raise InputError(f"{path}: truncated data for {name!r}")
            out[name] = np.frombuffer(blob[pos:end], dtype="<f8").reshape(dims).astype(np.float64)
            pos = end
    except (struct.error, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: corrupt checkpoint ({exc})") from exc
    return out
