"""Autoregressive inference: greedy and beam-search decoding over a pluggable
next-token scorer, plus a toy n-gram scorer for desk-scale verification.

Hypotheses are scored by sum-logprob / len^alpha. All tie-breaks are total
(lowest token id for greedy, lexicographically smallest sequence for beams)
so decoding is exactly reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .domain import EventSet, InvalidInputError, SeqConfig, TimeGrid, VocabSpec
from .seq_codec import DecodeResult, decode_event_sequence
from .tokenizer import TokenizerInterface


class ScorerContractError(ValueError):
    """A scorer returned a row that is not a normalized distribution."""


class ScorerInterface(Protocol):
    def next_logprobs(self, prefix: Sequence[int]) -> np.ndarray: ...


@dataclass(frozen=True)
class BeamConfig:
    beam_size: int = 4
    length_norm_alpha: float = 0.6
    max_length: int = 1000
    eos_id: int = 2

    def __post_init__(self):
        if self.beam_size < 1:
            raise InvalidInputError("beam_size must be >= 1")
        if self.max_length < 1:
            raise InvalidInputError("max_length must be >= 1")


class NGramScorer:
    """Deterministic scorer backed by a conditional probability table.

    The table maps the last (order-1) generated ids to a probability row;
    shorter prefixes use their full tail as context. Unknown contexts fall
    back to the uniform distribution.
    """

    def __init__(self, order: int, table: dict[tuple[int, ...], Sequence[float]]):
        if order < 1:
            raise InvalidInputError("order must be >= 1")
        self.order = order
        self.table = {}
        self._vocab_size = None
        for ctx, row in table.items():
            row = np.asarray(row, dtype=np.float64)
            if not np.isclose(row.sum(), 1.0, atol=1e-6) or np.any(row < 0):
                raise InvalidInputError(f"row for context {ctx} does not sum to 1")
            if self._vocab_size is None:
                self._vocab_size = row.size
            elif row.size != self._vocab_size:
                raise InvalidInputError("inconsistent row sizes")
            self.table[tuple(int(c) for c in ctx)] = row
        if self._vocab_size is None:
            raise InvalidInputError("empty scorer table")

    @property
    def vocab_size(self) -> int:
        return self._vocab_size

    def next_logprobs(self, prefix: Sequence[int]) -> np.ndarray:
        ctx = tuple(prefix[-(self.order - 1):]) if self.order > 1 else ()
        row = self.table.get(ctx)
        if row is None:
            row = np.full(self._vocab_size, 1.0 / self._vocab_size)
        with np.errstate(divide="ignore"):
            return np.log(row)

    @classmethod
    def from_json(cls, path: str) -> "NGramScorer":
        with open(path, "r", encoding="utf-8") as f:
            d = json.load(f)
        table = {}
        for key, row in d["table"].items():
            ctx = tuple(int(x) for x in key.split(",")) if key else ()
            table[ctx] = row
        return cls(int(d["order"]), table)

    def to_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(
                {
                    "order": self.order,
                    "table": {
                        ",".join(str(c) for c in ctx): row.tolist()
                        for ctx, row in sorted(self.table.items())
                    },
                },
                f,
                sort_keys=True,
                separators=(",", ":"),
            )


def _checked_logprobs(scorer: ScorerInterface, prefix: Sequence[int]) -> np.ndarray:
    row = np.asarray(scorer.next_logprobs(prefix), dtype=np.float64)
    if row.ndim != 1:
        raise ScorerContractError(f"scorer returned shape {row.shape}")
    total = np.logaddexp.reduce(row)
    if not np.isclose(total, 0.0, atol=1e-6):
        raise ScorerContractError(f"scorer row logsumexp {total} != 0")
    return row


def greedy_decode(scorer: ScorerInterface, cfg: BeamConfig) -> list[int]:
    """Repeatedly append the argmax token (ties -> lowest id) until EOS."""
    out: list[int] = []
    while len(out) < cfg.max_length:
        row = _checked_logprobs(scorer, out)
        token = int(np.argmax(row))
        out.append(token)
        if token == cfg.eos_id:
            break
    return out


def _norm_score(sum_logprob: float, length: int, alpha: float) -> float:
    return sum_logprob / (length**alpha)


def beam_decode(
    scorer: ScorerInterface, cfg: BeamConfig
) -> tuple[list[int], list[tuple[list[int], float]]]:
    """Beam search with length normalization.

    Returns the best finished (or, failing that, best unfinished) hypothesis
    and the ranked beam as (tokens, normalized score) pairs.
    """
    alpha = cfg.length_norm_alpha
    # hypotheses as (ids tuple, sum logprob)
    live: list[tuple[tuple[int, ...], float]] = [((), 0.0)]
    finished: list[tuple[tuple[int, ...], float]] = []
    for _ in range(cfg.max_length):
        if not live:
            break
        candidates: list[tuple[tuple[int, ...], float]] = []
        for ids, lp in live:
            row = _checked_logprobs(scorer, ids)
            for token in range(row.size):
                if row[token] == -np.inf:
                    continue
                candidates.append((ids + (token,), lp + float(row[token])))
        live = []
        # only the top beam_size expansions survive; EOS ones retire to finished
        for ids, lp in sorted(candidates, key=lambda c: (-c[1], c[0]))[: cfg.beam_size]:
            if ids[-1] == cfg.eos_id:
                finished.append((ids, lp))
            else:
                live.append((ids, lp))
        finished.sort(key=lambda c: (-_norm_score(c[1], len(c[0]), alpha), c[0]))
        finished = finished[: cfg.beam_size]
    pool = finished + live
    if not pool:
        return [], []
    ranked = sorted(
        ((list(ids), _norm_score(lp, len(ids), alpha)) for ids, lp in pool),
        key=lambda c: (-c[1], c[0]),
    )
    return list(ranked[0][0]), ranked


def decode_to_events(
    scorer: ScorerInterface,
    cfg: BeamConfig,
    duration: float,
    seq_cfg: SeqConfig,
    grid: TimeGrid,
    tok: TokenizerInterface,
    vocab: VocabSpec,
) -> DecodeResult:
    """Beam-decode a sequence, then parse it into event predictions."""
    best, _ = beam_decode(scorer, cfg)
    return decode_event_sequence(best, duration, seq_cfg, grid, tok, vocab)
