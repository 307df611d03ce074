"""Encode event sets into flat token sequences and robustly decode them back.

Layout per event (before_text): [t_start, t_end, caption tokens..., dot?];
after_text swaps the time pair behind the caption tokens. The decoder is a
best-effort parser over arbitrary model output: malformed regions are
skipped and counted, never raised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .domain import EventSet, InvalidInputError, SeqConfig, TimeGrid, TimePosition, VocabSpec
from .time_codec import decode_time, encode_time
from .tokenizer import TokenizerInterface


def encode_event_set(
    es: EventSet,
    cfg: SeqConfig,
    grid: TimeGrid,
    tok: TokenizerInterface,
    vocab: VocabSpec,
) -> list[int]:
    """Serialize an EventSet into one token sequence with interleaved time tokens."""
    ids: list[int] = []
    if cfg.emit_bos:
        ids.append(vocab.bos_id)
    ordered = sorted(enumerate(es.events), key=lambda p: (p[1].start, p[1].end, p[0]))
    for _, ev in ordered:
        ks = encode_time(ev.start, es.duration, grid)
        ke = encode_time(ev.end, es.duration, grid)
        time_ids = [vocab.time_token_id(ks), vocab.time_token_id(ke)]
        text_ids = tok.tokenize(ev.caption)
        if cfg.use_dot_separator and (not text_ids or text_ids[-1] != vocab.dot_id):
            text_ids.append(vocab.dot_id)
        if cfg.time_position is TimePosition.BEFORE_TEXT:
            ids.extend(time_ids)
            ids.extend(text_ids)
        else:
            ids.extend(text_ids)
            ids.extend(time_ids)
    if cfg.emit_eos:
        ids.append(vocab.eos_id)
    return ids


def transcript_to_sequence(
    transcript: EventSet,
    cfg: SeqConfig,
    grid: TimeGrid,
    tok: TokenizerInterface,
    vocab: VocabSpec,
) -> list[int]:
    """Transcripts are event sets whose captions are ASR sentences."""
    return encode_event_set(transcript, cfg, grid, tok, vocab)


@dataclass(frozen=True)
class DecodeResult:
    event_set: EventSet
    skipped_tokens: int


def decode_event_sequence(
    seq: Sequence[int],
    duration: float,
    cfg: SeqConfig,
    grid: TimeGrid,
    tok: TokenizerInterface,
    vocab: VocabSpec,
) -> DecodeResult:
    """Best-effort parse of a (possibly malformed) model output sequence.

    Events with inverted intervals or empty text are dropped; stray tokens
    are skipped. Both are tallied in skipped_tokens. Parsing stops at the
    first EOS.
    """
    if not duration > 0:
        raise InvalidInputError(f"duration {duration} must be > 0")
    ids = list(seq)
    triples: list[tuple[float, float, str]] = []
    skipped = 0
    i = 0
    if ids and ids[0] == vocab.bos_id:
        i = 1

    def emit(ks: int, ke: int, text_ids: list[int]) -> int:
        """Try to form an event; return tokens dropped (0 on success)."""
        start = decode_time(ks, duration, grid)
        end = decode_time(ke, duration, grid)
        if start > end or not text_ids:
            return 2 + len(text_ids)
        triples.append((start, end, tok.detokenize(text_ids)))
        return 0

    if cfg.time_position is TimePosition.BEFORE_TEXT:
        while i < len(ids):
            t = ids[i]
            if t == vocab.eos_id:
                break
            if vocab.is_time_id(t) and i + 1 < len(ids) and vocab.is_time_id(ids[i + 1]):
                ks, ke = t - vocab.text_vocab_size, ids[i + 1] - vocab.text_vocab_size
                i += 2
                text_ids: list[int] = []
                while i < len(ids) and not vocab.is_time_id(ids[i]) and ids[i] != vocab.eos_id:
                    if vocab.is_text_id(ids[i]):
                        text_ids.append(ids[i])
                    else:
                        skipped += 1
                    i += 1
                skipped += emit(ks, ke, text_ids)
            else:
                skipped += 1
                i += 1
    else:
        buffer: list[int] = []
        while i < len(ids):
            t = ids[i]
            if t == vocab.eos_id:
                break
            if vocab.is_time_id(t):
                if i + 1 < len(ids) and vocab.is_time_id(ids[i + 1]):
                    ks = t - vocab.text_vocab_size
                    ke = ids[i + 1] - vocab.text_vocab_size
                    skipped += emit(ks, ke, buffer)
                    buffer = []
                    i += 2
                else:
                    skipped += 1
                    i += 1
            elif vocab.is_text_id(t):
                buffer.append(t)
                i += 1
            else:
                skipped += 1
                i += 1
        skipped += len(buffer)

    return DecodeResult(EventSet.build(duration, triples), skipped)


def strip_time_tokens(seq: Sequence[int], vocab: VocabSpec) -> list[int]:
    """Drop all time-token ids, keeping text ids in order (paragraph mode)."""
    return [t for t in seq if t < vocab.text_vocab_size]


def truncate_or_pad(seq: Sequence[int], length: int, vocab: VocabSpec) -> list[int]:
    """Force the sequence to an exact length, preserving a trailing EOS."""
    if length < 1:
        raise InvalidInputError("length must be >= 1")
    ids = list(seq)
    if len(ids) > length:
        if ids[-1] == vocab.eos_id:
            return ids[: length - 1] + [vocab.eos_id]
        return ids[:length]
    return ids + [vocab.pad_id] * (length - len(ids))
