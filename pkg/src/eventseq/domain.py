"""Core value types: vocabulary layout, time grids, events and event sets.

All types are frozen dataclasses and safe to share across threads. Token id
layout: text ids occupy [0, V), sentinel i sits at V-1-i inside the text
region, and time token k has id V+k, so valid ids cover [0, V+N).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping


class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class TimeMode(str, Enum):
    RELATIVE = "relative"
    ABSOLUTE = "absolute"


class TimePosition(str, Enum):
    BEFORE_TEXT = "before_text"
    AFTER_TEXT = "after_text"


@dataclass(frozen=True)
class VocabSpec:
    """Layout of the joint text + time token id space."""

    text_vocab_size: int
    num_time_tokens: int
    pad_id: int = 0
    bos_id: int = 1
    eos_id: int = 2
    unk_id: int = 3
    num_sentinels: int = 0
    dot_id: int = 4

    def __post_init__(self):
        v = self.text_vocab_size
        if v <= 0:
            raise InvalidInputError("text_vocab_size must be positive")
        if self.num_time_tokens <= 0:
            raise InvalidInputError("num_time_tokens must be positive")
        specials = [self.pad_id, self.bos_id, self.eos_id, self.unk_id]
        if len(set(specials)) != 4 or any(not 0 <= s < v for s in specials):
            raise InvalidInputError("special ids must be distinct and in [0, V)")
        if not 0 <= self.dot_id < v:
            raise InvalidInputError("dot_id must be in [0, V)")
        if self.num_sentinels < 0:
            raise InvalidInputError("num_sentinels must be nonnegative")
        reserved = set(specials) | {self.dot_id}
        sentinels = []
        for i in range(self.num_sentinels):
            sid = v - 1 - i
            if sid in reserved or sid < 0:
                raise InvalidInputError(
                    f"sentinel {i} (id {sid}) collides with a special id or dot_id"
                )
            sentinels.append(sid)
        object.__setattr__(self, "_sentinel_ids", frozenset(sentinels))

    @property
    def total_vocab_size(self) -> int:
        return self.text_vocab_size + self.num_time_tokens

    def sentinel_id(self, i: int) -> int:
        if not 0 <= i < self.num_sentinels:
            raise InvalidInputError(f"sentinel index {i} out of range")
        return self.text_vocab_size - 1 - i

    @property
    def sentinel_ids(self) -> frozenset[int]:
        return self._sentinel_ids

    def is_time_id(self, token_id: int) -> bool:
        return self.text_vocab_size <= token_id < self.total_vocab_size

    def time_token_id(self, grid_index: int) -> int:
        if not 0 <= grid_index < self.num_time_tokens:
            raise InvalidInputError(f"grid index {grid_index} out of range")
        return self.text_vocab_size + grid_index

    def is_text_id(self, token_id: int) -> bool:
        """Plain text ids: in [0, V) and neither special nor sentinel."""
        if not 0 <= token_id < self.text_vocab_size:
            return False
        if token_id in (self.pad_id, self.bos_id, self.eos_id):
            return False
        return token_id not in self.sentinel_ids

    def to_dict(self) -> dict:
        return {
            "V": self.text_vocab_size,
            "N": self.num_time_tokens,
            "pad": self.pad_id,
            "bos": self.bos_id,
            "eos": self.eos_id,
            "unk": self.unk_id,
            "num_sentinels": self.num_sentinels,
            "dot": self.dot_id,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "VocabSpec":
        return cls(
            text_vocab_size=int(d["V"]),
            num_time_tokens=int(d["N"]),
            pad_id=int(d["pad"]),
            bos_id=int(d["bos"]),
            eos_id=int(d["eos"]),
            unk_id=int(d["unk"]),
            num_sentinels=int(d["num_sentinels"]),
            dot_id=int(d["dot"]),
        )


@dataclass(frozen=True)
class TimeGrid:
    """The time-token vocabulary: quantization mode and grid size."""

    mode: TimeMode
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be positive")
        if self.mode is TimeMode.RELATIVE and self.n < 2:
            raise InvalidInputError("relative mode needs n >= 2")


@dataclass(frozen=True)
class Event:
    """One temporally localized caption, times in seconds.

    Deliberately unvalidated: validate_event_set diagnoses bad instances.
    """

    start: float
    end: float
    caption: str


@dataclass(frozen=True)
class EventSet:
    """An ordered event collection bound to a video duration.

    Use build() for validated/clamped ingestion; direct construction is
    unchecked so diagnostics can inspect malformed data.
    """

    duration: float
    events: tuple[Event, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    @classmethod
    def build(
        cls,
        duration: float,
        events: Iterable[tuple[float, float, str]],
        strict: bool = False,
    ) -> "EventSet":
        """Ingest raw (start, end, caption) triples.

        Times are clamped into [0, duration] unless strict, in which case
        out-of-bounds or inverted intervals raise. Events are sorted by
        (start, end, input order).
        """
        if not duration > 0:
            raise InvalidInputError(f"duration {duration} must be > 0")
        out = []
        for idx, (start, end, caption) in enumerate(events):
            if strict:
                if start > end:
                    raise InvalidInputError(f"start>end at index {idx}")
                if start < 0 or end > duration:
                    raise InvalidInputError(f"event {idx} outside [0, {duration}]")
            start = min(max(float(start), 0.0), duration)
            end = min(max(float(end), 0.0), duration)
            if start > end:
                raise InvalidInputError(f"start>end at index {idx}")
            out.append((start, end, idx, str(caption)))
        out.sort(key=lambda e: (e[0], e[1], e[2]))
        return cls(duration, tuple(Event(s, e, c) for s, e, _, c in out))

    def to_dict(self) -> dict:
        return {
            "duration": self.duration,
            "events": [
                {"start": ev.start, "end": ev.end, "caption": ev.caption}
                for ev in self.events
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping, strict: bool = False) -> "EventSet":
        return cls.build(
            float(d["duration"]),
            [(ev["start"], ev["end"], ev["caption"]) for ev in d["events"]],
            strict=strict,
        )


def validate_event_set(es: EventSet) -> list[str]:
    """Diagnostic check of EventSet invariants; returns violation messages."""
    violations = []
    if not es.duration > 0 or not math.isfinite(es.duration):
        violations.append(f"duration {es.duration} not a positive finite number")
    prev_key = None
    for idx, ev in enumerate(es.events):
        if not (math.isfinite(ev.start) and math.isfinite(ev.end)):
            violations.append(f"non-finite times at index {idx}")
            continue
        if ev.start < 0:
            violations.append(f"start<0 at index {idx}")
        if ev.start > ev.end:
            violations.append(f"start>end at index {idx}")
        if ev.end > es.duration:
            violations.append(f"end>duration at index {idx}")
        key = (ev.start, ev.end)
        if prev_key is not None and key < prev_key:
            violations.append(f"ordering violated at index {idx}")
        prev_key = key
    return violations


@dataclass(frozen=True)
class SeqConfig:
    """How an event set is laid out as one flat token sequence."""

    time_position: TimePosition = TimePosition.BEFORE_TEXT
    use_dot_separator: bool = True
    emit_bos: bool = True
    emit_eos: bool = True


def load_corpus(path: str, strict: bool = False) -> dict[str, EventSet]:
    """Read a video-id -> EventSet JSON corpus file."""
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    return {vid: EventSet.from_dict(d, strict=strict) for vid, d in raw.items()}


def dump_corpus(corpus: Mapping[str, EventSet], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(
            {vid: es.to_dict() for vid, es in sorted(corpus.items())},
            f,
            sort_keys=True,
            separators=(",", ":"),
        )
