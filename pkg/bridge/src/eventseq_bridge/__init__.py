"""In-process binding over the eventseq library.

Mirrors the CLI subcommands as functions taking and returning
JSON-serializable values, so training data pipelines can call the codec,
corruption, loss and evaluation operations without per-example process
overhead. Results are byte-identical to the CLI after canonical JSON
serialization; no computation happens here.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from eventseq.decoder import BeamConfig, NGramScorer, beam_decode
from eventseq.domain import (
    Event,
    EventSet,
    SeqConfig,
    TimeGrid,
    TimeMode,
    TimePosition,
    VocabSpec,
    validate_event_set,
)
from eventseq.loss import sequence_nll
from eventseq.metrics import EvalConfig
from eventseq.metrics import evaluate as _evaluate
from eventseq.seq_codec import decode_event_sequence, encode_event_set
from eventseq.tokenizer import ReferenceTokenizer, VocabFile
from eventseq.transforms import (
    CorruptionConfig,
    corrupt_spans,
    few_shot_subset,
    pseudo_label,
    temporal_crop,
)


class BridgeError(ValueError):
    """Carries the primary component's diagnostic payload."""

    def __init__(self, message: str, violations: Optional[list[str]] = None):
        super().__init__(message)
        self.violations = violations or []


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _event_set(d: Mapping) -> EventSet:
    raw = EventSet(
        float(d["duration"]),
        tuple(
            Event(float(e["start"]), float(e["end"]), str(e["caption"]))
            for e in d["events"]
        ),
    )
    violations = validate_event_set(raw)
    if violations:
        raise BridgeError("invalid event set", violations)
    return EventSet.from_dict(d)


def _seq_setup(args: Mapping):
    n = int(args.get("n_time_tokens", 100))
    grid = TimeGrid(TimeMode(args.get("time_mode", "relative")), n)
    cfg = SeqConfig(
        time_position=(
            TimePosition.BEFORE_TEXT
            if args.get("time_position", "before") == "before"
            else TimePosition.AFTER_TEXT
        ),
        use_dot_separator=args.get("dot", "on") == "on",
    )
    tok = ReferenceTokenizer(VocabFile(args["vocab"]), n)
    return cfg, grid, tok, tok.vocab_spec


def encode(args: Mapping) -> list[int]:
    cfg, grid, tok, vocab = _seq_setup(args)
    return encode_event_set(_event_set(args["annotations"]), cfg, grid, tok, vocab)


def decode(args: Mapping) -> dict:
    cfg, grid, tok, vocab = _seq_setup(args)
    res = decode_event_sequence(
        args["tokens"], float(args["duration"]), cfg, grid, tok, vocab
    )
    out = res.event_set.to_dict()
    out["skipped_tokens"] = res.skipped_tokens
    return out


def pseudo_label_op(args: Mapping) -> dict:
    raw = args["transcript"]
    es = pseudo_label(
        [(e["start"], e["end"], e["caption"]) for e in raw["events"]],
        raw["duration"],
    )
    return es.to_dict()


def corrupt(args: Mapping) -> dict:
    vocab = VocabSpec.from_dict(args["vocab_spec"])
    cc = CorruptionConfig(
        float(args.get("mask_probability", 0.15)),
        float(args.get("mean_span_length", 3.0)),
        int(args.get("seed", 0)),
    )
    res = corrupt_spans(args["tokens"], cc, vocab)
    return {
        "corrupted": list(res.corrupted),
        "target": list(res.target),
        "num_spans": res.num_spans,
        "spans_capped": res.spans_capped,
    }


def crop(args: Mapping) -> dict:
    es = _event_set(args["annotations"])
    out = temporal_crop(es, int(args.get("seed", 0)), args.get("max_narrations"))
    return out.to_dict()


def subset(args: Mapping) -> dict:
    corpus = {vid: _event_set(d) for vid, d in args["corpus"].items()}
    kept = few_shot_subset(corpus, float(args["fraction"]), int(args.get("seed", 0)))
    return {vid: es.to_dict() for vid, es in sorted(kept.items())}


def loss(args: Mapping) -> dict:
    value = sequence_nll(
        args["target"],
        np.asarray(args["logprobs"], dtype=np.float64),
        args.get("weights"),
    )
    return {"loss": value}


def decode_run(args: Mapping) -> dict:
    scorer_spec = args["scorer"]
    table = {}
    for key, row in scorer_spec["table"].items():
        ctx = tuple(int(x) for x in key.split(",")) if key else ()
        table[ctx] = row
    scorer = NGramScorer(int(scorer_spec["order"]), table)
    cfg = BeamConfig(
        int(args.get("beam_size", 4)),
        float(args.get("alpha", 0.6)),
        int(args.get("max_length", 1000)),
        int(args.get("eos_id", 2)),
    )
    best, ranked = beam_decode(scorer, cfg)
    return {"best": best, "beam": [{"tokens": t, "score": s} for t, s in ranked]}


def eval_op(args: Mapping) -> dict:
    preds = {vid: _event_set(d) for vid, d in args["preds"].items()}
    ref_sets = [
        {vid: _event_set(d) for vid, d in rs.items()} for rs in args["refs"]
    ]
    kwargs = {"caption_metric": args.get("caption_metric", "cider")}
    if args.get("thresholds"):
        kwargs["iou_thresholds"] = tuple(args["thresholds"])
    return _evaluate(preds, ref_sets, EvalConfig(**kwargs))


_OPS = {
    "encode": encode,
    "decode": decode,
    "pseudo-label": pseudo_label_op,
    "corrupt": corrupt,
    "crop": crop,
    "subset": subset,
    "loss": loss,
    "decode-run": decode_run,
    "eval": eval_op,
}


def bind(op_name: str, args: Mapping) -> Any:
    """Dispatch one operation by its CLI subcommand name."""
    if op_name not in _OPS:
        raise BridgeError(f"unknown operation {op_name!r}")
    return _OPS[op_name](args)
