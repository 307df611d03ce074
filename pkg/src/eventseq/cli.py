"""Command-line interface: every operation as a subcommand with JSON I/O.

Exit codes: 0 success, 1 usage error, 2 data error. Failures are reported
on stderr as one JSON object per error. Config precedence: flags > config
file > defaults.
"""

from __future__ import annotations

import argparse
import json
import struct
import sys
from typing import Optional, Sequence

import numpy as np

from . import selftest as selftest_mod
from .decoder import BeamConfig, NGramScorer, beam_decode
from .domain import (
    EventSet,
    InvalidInputError,
    SeqConfig,
    TimeGrid,
    TimeMode,
    TimePosition,
    VocabSpec,
    dump_corpus,
    load_corpus,
)
from .loss import sequence_nll
from .metrics import EvalConfig, evaluate
from .seq_codec import decode_event_sequence, encode_event_set
from .tokenizer import ReferenceTokenizer, VocabFile
from .transforms import (
    CorruptionConfig,
    corrupt_spans,
    few_shot_subset,
    pseudo_label,
    temporal_crop,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump_json(obj, path: Optional[str]) -> None:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _apply_config_defaults(args: argparse.Namespace) -> argparse.Namespace:
    cfg_path = getattr(args, "config", None)
    if not cfg_path:
        return args
    defaults = _load_json(cfg_path)
    for key, value in defaults.items():
        attr = key.replace("-", "_")
        if getattr(args, f"_flag_{attr}", False):
            continue  # explicit flag wins
        if hasattr(args, attr):
            setattr(args, attr, value)
    return args


class _TrackDefault(argparse.Action):
    """Remember whether a value came from an explicit flag."""

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        setattr(namespace, f"_flag_{self.dest}", True)


def _add_seq_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None)
    p.add_argument("--time-mode", choices=["relative", "absolute"],
                   default="relative", action=_TrackDefault, dest="time_mode")
    p.add_argument("--n-time-tokens", type=int, default=100,
                   action=_TrackDefault, dest="n_time_tokens")
    p.add_argument("--time-position", choices=["before", "after"],
                   default="before", action=_TrackDefault, dest="time_position")
    p.add_argument("--dot", choices=["on", "off"], default="on",
                   action=_TrackDefault, dest="dot")


def _seq_setup(args) -> tuple[SeqConfig, TimeGrid, ReferenceTokenizer, VocabSpec]:
    grid = TimeGrid(TimeMode(args.time_mode), args.n_time_tokens)
    cfg = SeqConfig(
        time_position=(
            TimePosition.BEFORE_TEXT
            if args.time_position == "before"
            else TimePosition.AFTER_TEXT
        ),
        use_dot_separator=args.dot == "on",
    )
    tok = ReferenceTokenizer(VocabFile.load(args.vocab), args.n_time_tokens)
    return cfg, grid, tok, tok.vocab_spec


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eventseq")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode")
    p.add_argument("--annotations", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", default=None)
    _add_seq_flags(p)

    p = sub.add_parser("decode")
    p.add_argument("--tokens", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--out", default=None)
    _add_seq_flags(p)

    p = sub.add_parser("pseudo-label")
    p.add_argument("--transcript", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("corrupt")
    p.add_argument("--tokens", required=True)
    p.add_argument("--vocab-spec", required=True)
    p.add_argument("--mask-probability", type=float, default=0.15)
    p.add_argument("--mean-span-length", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("crop")
    p.add_argument("--annotations", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-narrations", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("subset")
    p.add_argument("--corpus", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("loss")
    p.add_argument("--target", required=True)
    p.add_argument("--logprobs", required=True)
    p.add_argument("--weights", default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("decode-run")
    p.add_argument("--scorer", required=True)
    p.add_argument("--beam-size", type=int, default=4)
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--max-length", type=int, default=1000)
    p.add_argument("--eos-id", type=int, default=2)
    p.add_argument("--out", default=None)

    p = sub.add_parser("eval")
    p.add_argument("--preds", required=True)
    p.add_argument("--refs", required=True, help="comma-separated reference files")
    p.add_argument("--report", default=None)
    p.add_argument("--thresholds", default=None, help="comma-separated fractions")
    p.add_argument("--caption-metric", choices=["cider", "meteor_lite"],
                   default="cider")

    sub.add_parser("selftest")
    return parser


def read_logprob_matrix(path: str) -> np.ndarray:
    """Binary layout: two little-endian u64 (rows, cols), then row-major f64."""
    with open(path, "rb") as f:
        header = f.read(16)
        if len(header) != 16:
            raise InvalidInputError("truncated logprob header")
        rows, cols = struct.unpack("<QQ", header)
        data = np.fromfile(f, dtype="<f8", count=rows * cols)
    if data.size != rows * cols:
        raise InvalidInputError("truncated logprob payload")
    return data.reshape(rows, cols)


def write_logprob_matrix(path: str, matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix, dtype="<f8")
    with open(path, "wb") as f:
        f.write(struct.pack("<QQ", matrix.shape[0], matrix.shape[1]))
        matrix.tofile(f)


def _run(args: argparse.Namespace) -> int:
    cmd = args.command
    if cmd == "encode":
        args = _apply_config_defaults(args)
        cfg, grid, tok, vocab = _seq_setup(args)
        es = EventSet.from_dict(_load_json(args.annotations))
        _dump_json(encode_event_set(es, cfg, grid, tok, vocab), args.out)
    elif cmd == "decode":
        args = _apply_config_defaults(args)
        cfg, grid, tok, vocab = _seq_setup(args)
        ids = _load_json(args.tokens)
        res = decode_event_sequence(ids, args.duration, cfg, grid, tok, vocab)
        out = res.event_set.to_dict()
        out["skipped_tokens"] = res.skipped_tokens
        _dump_json(out, args.out)
    elif cmd == "pseudo-label":
        raw = _load_json(args.transcript)
        es = pseudo_label(
            [(e["start"], e["end"], e["caption"]) for e in raw["events"]],
            raw["duration"],
        )
        _dump_json(es.to_dict(), args.out)
    elif cmd == "corrupt":
        vocab = VocabSpec.from_dict(_load_json(args.vocab_spec))
        cc = CorruptionConfig(args.mask_probability, args.mean_span_length, args.seed)
        res = corrupt_spans(_load_json(args.tokens), cc, vocab)
        _dump_json(
            {
                "corrupted": list(res.corrupted),
                "target": list(res.target),
                "num_spans": res.num_spans,
                "spans_capped": res.spans_capped,
            },
            args.out,
        )
    elif cmd == "crop":
        es = EventSet.from_dict(_load_json(args.annotations))
        out = temporal_crop(es, args.seed, args.max_narrations)
        _dump_json(out.to_dict(), args.out)
    elif cmd == "subset":
        corpus = load_corpus(args.corpus)
        dump_corpus(few_shot_subset(corpus, args.fraction, args.seed), args.out)
    elif cmd == "loss":
        target = _load_json(args.target)
        logprobs = read_logprob_matrix(args.logprobs)
        weights = _load_json(args.weights) if args.weights else None
        _dump_json({"loss": sequence_nll(target, logprobs, weights)}, args.out)
    elif cmd == "decode-run":
        scorer = NGramScorer.from_json(args.scorer)
        cfg = BeamConfig(args.beam_size, args.alpha, args.max_length, args.eos_id)
        best, ranked = beam_decode(scorer, cfg)
        _dump_json(
            {
                "best": best,
                "beam": [{"tokens": t, "score": s} for t, s in ranked],
            },
            args.out,
        )
    elif cmd == "eval":
        preds = load_corpus(args.preds)
        ref_sets = [load_corpus(p) for p in args.refs.split(",")]
        kwargs = {"caption_metric": args.caption_metric}
        if args.thresholds:
            kwargs["iou_thresholds"] = tuple(
                float(t) for t in args.thresholds.split(",")
            )
        report = evaluate(preds, ref_sets, EvalConfig(**kwargs))
        _dump_json(report, args.report)
    elif cmd == "selftest":
        failures = selftest_mod.run()
        if failures:
            for msg in failures:
                print(json.dumps({"error": "selftest", "detail": msg}), file=sys.stderr)
            return 2
        print("selftest ok")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(json.dumps({"error": "usage", "detail": str(exc)}), file=sys.stderr)
        return 1
    try:
        return _run(args)
    except (InvalidInputError, ValueError, OSError, KeyError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
