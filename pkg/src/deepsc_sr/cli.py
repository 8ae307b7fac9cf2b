"""Command-line entry point: ``deepsc-sr {train,eval,baseline-eval,synth}``.

Exit codes: 0 success, 1 input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import harness
from .classic import PolarCode, huffman_build
from .corpus import load_manifest, synth_corpus
from .errors import InputError, NumericalError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def _cmd_train(args) -> int:
    config = harness.load_config(args.config, paper_arch=args.paper_arch)
    manifest = load_manifest(args.manifest)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = harness.train(config, manifest, out=args.out)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(
        json.dumps(
            {
                "checkpoint": str(args.out),
                "epochs": len(result.losses),
                "final_loss": result.losses[-1],
                "skipped": len(result.skipped),
                "converged": result.converged,
            }
        )
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    manifest = load_manifest(args.manifest)
    meta = json.loads(Path(str(args.ckpt) + ".json").read_text()) if Path(str(args.ckpt) + ".json").exists() else {}
    exp = meta.get("experiment", {})
    rows = harness.evaluate(
        args.ckpt,
        manifest,
        harness.parse_channels(args.channels),
        harness.parse_snr_grid(args.snrs),
        seed=args.seed,
        frame_len=int(exp.get("frame_len", 320)),
        hop=int(exp.get("hop", 160)),
    )
    harness.write_csv(args.out, rows)
    return EXIT_OK


def _cmd_baseline(args) -> int:
    manifest = load_manifest(args.manifest)
    if args.codebook_manifest:
        codebook = huffman_build(load_manifest(args.codebook_manifest).texts)
    else:
        codebook = huffman_build(manifest.texts)
    code = PolarCode(n_code=args.block_length, k_code=args.info_bits, list_size=args.list_size)
    rows = harness.evaluate_baseline(
        manifest,
        harness.parse_channels(args.channels),
        harness.parse_snr_grid(args.snrs),
        seed=args.seed,
        codebook=codebook,
        code=code,
    )
    harness.write_csv(args.out, rows)
    meta = {
        "asr": "perfect: ground-truth transcripts feed the transmitter",
        "polar": {"n": code.n_code, "k": code.k_code, "list_size": code.list_size, "design_snr_db": code.design_snr_db},
        "modulation": "64-QAM Gray, max-log LLR",
        "huffman_codebook": codebook.to_pairs(),
    }
    Path(str(args.out) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return EXIT_OK


def _cmd_synth(args) -> int:
    manifest = synth_corpus(args.seed, args.count, args.out)
    print(f"wrote {len(manifest)} utterances to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deepsc-sr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the semantic transceiver")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="checkpoint path (a .json sidecar is written next to it)")
    p.add_argument("--paper-arch", action="store_true", help="use the full-size architecture")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="SNR sweep of a trained checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--channels", default="awgn,rayleigh")
    p.add_argument("--snrs", default="-6:18:3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV output")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("baseline-eval", help="SNR sweep of the Huffman/polar/64-QAM text transceiver")
    p.add_argument("--manifest", required=True)
    p.add_argument("--codebook-manifest", help="corpus for Huffman statistics (default: --manifest)")
    p.add_argument("--channels", default="awgn,rayleigh")
    p.add_argument("--snrs", default="-6:18:3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--block-length", type=int, default=512)
    p.add_argument("--info-bits", type=int, default=256)
    p.add_argument("--list-size", type=int, default=4)
    p.add_argument("--out", required=True, help="CSV output")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("synth", help="write a synthetic tone corpus and manifest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
