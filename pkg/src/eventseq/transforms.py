"""Training-example construction from transcripts and annotations.

Covers pseudo-labeling ASR sentences as events, the generative target, span
corruption with sentinel tokens, random temporal cropping and few-shot
corpus subsetting. Everything is deterministic given an explicit seed; no
shared mutable RNG.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .domain import EventSet, InvalidInputError, SeqConfig, TimeGrid, VocabSpec
from .seq_codec import transcript_to_sequence
from .tokenizer import TokenizerInterface

MIN_CROP_FRACTION = 0.1


@dataclass(frozen=True)
class CorruptionConfig:
    mask_probability: float = 0.15
    mean_span_length: float = 3.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mask_probability <= 1.0:
            raise InvalidInputError("mask_probability must be in [0, 1]")
        if self.mean_span_length < 1.0:
            raise InvalidInputError("mean_span_length must be >= 1")


@dataclass(frozen=True)
class TrainingExample:
    decoder_target: tuple[int, ...]
    kind: str  # generative | denoising | finetune
    encoder_text: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind == "generative" and self.encoder_text is not None:
            raise InvalidInputError("generative examples carry no encoder text")


def pseudo_label(
    transcript: Iterable[tuple[float, float, str]], duration: float
) -> EventSet:
    """Reinterpret timed ASR sentences as pseudo events."""
    if not duration > 0:
        raise InvalidInputError(f"duration {duration} must be > 0")
    triples = [
        (start, end, sentence)
        for start, end, sentence in transcript
        if sentence.strip()
    ]
    return EventSet.build(duration, triples)


def make_generative_example(
    transcript: Iterable[tuple[float, float, str]],
    duration: float,
    cfg: SeqConfig,
    grid: TimeGrid,
    tok: TokenizerInterface,
    vocab: VocabSpec,
) -> TrainingExample:
    """Target = the full transcribed-speech sequence; no encoder text."""
    target = transcript_to_sequence(
        pseudo_label(transcript, duration), cfg, grid, tok, vocab
    )
    return TrainingExample(decoder_target=tuple(target), kind="generative")


@dataclass(frozen=True)
class CorruptionResult:
    corrupted: tuple[int, ...]
    target: tuple[int, ...]
    num_spans: int
    spans_capped: bool  # True when the sentinel budget forced fewer spans


def _partition(total: int, parts: int, rng: random.Random) -> list[int]:
    """Split total into `parts` nonnegative integers, uniformly at random."""
    if parts <= 0:
        return []
    if parts == 1:
        return [total]
    cuts = sorted(rng.sample(range(total + parts - 1), parts - 1))
    out = []
    prev = -1
    for c in cuts:
        out.append(c - prev - 1)
        prev = c
    out.append(total + parts - 2 - prev)
    return out


def corrupt_spans(
    seq: Sequence[int], cc: CorruptionConfig, vocab: VocabSpec
) -> CorruptionResult:
    """Span corruption: mask random spans, replace each with a unique sentinel.

    BOS/EOS/PAD positions are never masked. The masked-token budget is
    round(P * maskable_len); span count targets budget / M so the mean span
    length is M. Masked and kept tokens are interleaved by random partition,
    every span separated by at least one kept token (except when everything
    is masked as a single span). Fully reconstructible: splicing the target
    spans back at the sentinel positions reproduces the input.
    """
    ids = list(seq)
    if any(t in vocab.sentinel_ids for t in ids):
        raise InvalidInputError("input already contains sentinel ids")
    structural = {vocab.bos_id, vocab.eos_id, vocab.pad_id}
    maskable_idx = [i for i, t in enumerate(ids) if t not in structural]
    n = len(maskable_idx)
    budget = round(cc.mask_probability * n)
    if budget == 0 or n == 0:
        return CorruptionResult(tuple(ids), (vocab.eos_id,), 0, False)

    rng = random.Random(cc.rng_seed)
    num_spans = max(1, round(budget / cc.mean_span_length))
    # spans need a kept token between them: at most (n - budget + 1) can fit
    num_spans = min(num_spans, max(1, n - budget + 1))
    capped = False
    if num_spans > vocab.num_sentinels:
        if vocab.num_sentinels == 0:
            raise InvalidInputError("vocab has no sentinel ids")
        num_spans = vocab.num_sentinels
        capped = True

    # positive span lengths summing to budget
    span_lengths = [c + 1 for c in _partition(budget - num_spans, num_spans, rng)]
    # gaps of kept tokens around them; interior gaps must be >= 1
    num_gaps = num_spans + 1
    interior = num_gaps - 2
    keep_total = n - budget
    gap_lengths = _partition(keep_total - interior, num_gaps, rng)
    for g in range(1, num_gaps - 1):
        gap_lengths[g] += 1

    masked: set[int] = set()
    span_of: dict[int, int] = {}  # maskable position -> span index
    pos = gap_lengths[0]
    for s, length in enumerate(span_lengths):
        for j in range(length):
            masked.add(pos + j)
            span_of[pos + j] = s
        pos += length + gap_lengths[s + 1]

    pos_to_span = {maskable_idx[p]: span_of[p] for p in span_of}
    corrupted: list[int] = []
    target: list[int] = []
    emitted: set[int] = set()
    for i, t in enumerate(ids):
        s = pos_to_span.get(i)
        if s is None:
            corrupted.append(t)
        else:
            if s not in emitted:
                corrupted.append(vocab.sentinel_id(s))
                target.append(vocab.sentinel_id(s))
                emitted.add(s)
            target.append(t)
    target.append(vocab.eos_id)
    return CorruptionResult(tuple(corrupted), tuple(target), num_spans, capped)


def make_denoising_example(
    seq: Sequence[int], cc: CorruptionConfig, vocab: VocabSpec
) -> TrainingExample:
    res = corrupt_spans(seq, cc, vocab)
    return TrainingExample(
        decoder_target=res.target, kind="denoising", encoder_text=res.corrupted
    )


def temporal_crop(
    es: EventSet,
    rng_seed: int,
    max_narrations: Optional[int] = None,
    window: Optional[tuple[float, float]] = None,
) -> EventSet:
    """Random temporal crop: sample a window, clip events to it, re-anchor.

    The sampled window is at least MIN_CROP_FRACTION of the duration; with
    max_narrations set, the window end is shrunk until it overlaps at most
    that many events. Kept events are those with positive intersection.
    An explicit window overrides sampling (used by tests and replay).
    """
    duration = es.duration
    if window is not None:
        a, b = window
        if not 0.0 <= a < b <= duration:
            raise InvalidInputError(f"window {window} not inside [0, {duration}]")
    else:
        rng = random.Random(rng_seed)
        a = rng.uniform(0.0, (1.0 - MIN_CROP_FRACTION) * duration)
        b = rng.uniform(a + MIN_CROP_FRACTION * duration, duration)

    def overlapping(lo: float, hi: float) -> list:
        return [
            ev
            for ev in es.events
            if min(ev.end, hi) - max(ev.start, lo) > 0.0
        ]

    kept = overlapping(a, b)
    if max_narrations is not None and max_narrations >= 0:
        kept.sort(key=lambda ev: (ev.start, ev.end))
        while len(kept) > max_narrations:
            cut = kept[max_narrations].start
            if cut > a:
                b = cut
                kept = overlapping(a, b)
                kept.sort(key=lambda ev: (ev.start, ev.end))
            else:
                # events straddle the window start; drop the latest ones
                kept = kept[:max_narrations]
    triples = [
        (max(ev.start, a) - a, min(ev.end, b) - a, ev.caption) for ev in kept
    ]
    return EventSet.build(b - a, triples)


def few_shot_subset(
    corpus: Mapping[str, EventSet], fraction: float, seed: int
) -> dict[str, EventSet]:
    """Deterministic seeded fraction of a corpus, keeping ceil(f*n) videos."""
    if not 0.0 < fraction <= 1.0:
        raise InvalidInputError("fraction must be in (0, 1]")
    ids = sorted(corpus)
    rng = random.Random(seed)
    rng.shuffle(ids)
    keep = ids[: math.ceil(fraction * len(ids))]
    return {vid: corpus[vid] for vid in keep}
