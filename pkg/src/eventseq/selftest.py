"""Embedded golden fixtures for the `selftest` subcommand."""

from __future__ import annotations

import math

import numpy as np

from .domain import EventSet, SeqConfig, TimeGrid, TimeMode, TimePosition
from .loss import sequence_nll
from .metrics import EvalConfig, evaluate, temporal_iou
from .seq_codec import encode_event_set
from .tokenizer import ReferenceTokenizer, VocabFile

FIXTURE_WORDS = ["add", "oil", "stir", "the", "pan", "heat", "into", "mix"]


def fixture_tokenizer(n_time_tokens: int = 100) -> ReferenceTokenizer:
    return ReferenceTokenizer(VocabFile.build(FIXTURE_WORDS), n_time_tokens)


def fixture_event_set() -> EventSet:
    return EventSet.build(
        120.0, [(0.0, 60.0, "add oil"), (60.0, 120.0, "stir")]
    )


def run() -> list[str]:
    failures: list[str] = []

    # event-sequence layout fixture
    tok = fixture_tokenizer()
    spec = tok.vocab_spec
    v = spec.text_vocab_size
    grid = TimeGrid(TimeMode.RELATIVE, 100)
    seq = encode_event_set(
        fixture_event_set(),
        SeqConfig(TimePosition.BEFORE_TEXT, True),
        grid,
        tok,
        spec,
    )
    add, oil, stir = (tok.tokenize(w)[0] for w in ("add", "oil", "stir"))
    expected = [
        spec.bos_id, v + 0, v + 50, add, oil, spec.dot_id,
        v + 50, v + 99, stir, spec.dot_id, spec.eos_id,
    ]
    if seq != expected:
        failures.append(f"encode fixture: got {seq}, want {expected}")

    # IoU fixture
    if abs(temporal_iou((0, 10), (5, 15)) - 5 / 15) > 1e-12:
        failures.append("iou fixture mismatch")

    # loss fixture: uniform rows over 10 tokens
    lp = np.full((4, 10), math.log(0.1))
    loss = sequence_nll([0, 1, 2, 3, 4], lp)
    if abs(loss - math.log(10)) > 1e-12:
        failures.append(f"loss fixture: got {loss}")

    # self-match evaluation fixture
    refs = {
        "v1": EventSet.build(
            100.0,
            [
                (0.0, 30.0, "a man pours oil into the pan"),
                (30.0, 70.0, "he stirs the vegetables slowly"),
                (70.0, 100.0, "the dish is served on a plate"),
            ],
        )
    }
    report = evaluate(refs, [refs], EvalConfig())
    corpus = report["corpus"]
    if abs(corpus["f1"] - 1.0) > 1e-9:
        failures.append(f"self-match F1: {corpus['f1']}")
    if abs(corpus["caption_score"] - 10.0) > 1e-9:
        failures.append(f"self-match CIDEr-D: {corpus['caption_score']}")
    if abs(corpus["soda_f"] - 1.0) > 1e-9:
        failures.append(f"self-match SODA f: {corpus['soda_f']}")
    return failures
