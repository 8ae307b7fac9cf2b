"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from deepsc_sr import _pykernels
from deepsc_sr.classic.polar import PolarCode, bpsk_llrs

try:
    from deepsc_sr import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def cases():
    rng = np.random.default_rng(0)
    code = PolarCode()
    llr = bpsk_llrs(code.encode(rng.integers(0, 2, 256, dtype=np.uint8)), 1.0, rng)
    log_probs = np.log(rng.dirichlet(np.ones(29), size=60))
    ext = np.full(41, 28, dtype=np.int64)
    ext[1::2] = rng.integers(0, 28, 20)
    ref = rng.integers(0, 28, 120).astype(np.int64)
    hyp = rng.integers(0, 28, 110).astype(np.int64)
    return {
        "polar_scl N=512 L=4": ("polar_scl_decode", (llr, code.frozen_mask, 4)),
        "polar_scl N=512 L=1": ("polar_scl_decode", (llr, code.frozen_mask, 1)),
        "ctc_forward_backward 60x41": ("ctc_forward_backward", (log_probs, ext)),
        "edit_counts 120x110": ("edit_counts", (ref, hyp)),
    }


def best_of(fn, args, repeat):
    number = 5
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':30s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for label, (name, call_args) in cases().items():
        slow = best_of(getattr(_pykernels, name), call_args, args.repeat)
        if _kernels is None:
            print(f"{label:30s} {slow * 1e3:10.3f} {'-':>10s} {'-':>8s}")
            continue
        fast = best_of(getattr(_kernels, name), call_args, args.repeat)
        print(f"{label:30s} {slow * 1e3:10.3f} {fast * 1e3:10.3f} {slow / fast:7.1f}x")


if __name__ == "__main__":
    main()
