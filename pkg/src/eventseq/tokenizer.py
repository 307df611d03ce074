"""Text <-> token-id conversion behind a pluggable interface.

The reference tokenizer is a deterministic word-level tokenizer meant for
desk-scale testing; production subword vocabularies can be adapted behind
the same TokenizerInterface protocol. Normalization is lowercase, punctuation
split off as its own tokens, whitespace collapsed.
"""

from __future__ import annotations

import re
from typing import Iterable, Protocol, Sequence

from .domain import InvalidInputError, VocabSpec

PAD_SURFACE = "<pad>"
BOS_SURFACE = "<bos>"
EOS_SURFACE = "<eos>"
UNK_SURFACE = "<unk>"

_WORD_RE = re.compile(r"[^\W_]+|[^\w\s]", re.UNICODE)


def split_words(text: str) -> list[str]:
    """Normalize text into lowercase word/punctuation tokens."""
    return _WORD_RE.findall(text.lower())


class InvalidTokenError(ValueError):
    """An id outside the text-id region was fed to detokenize."""


class TokenizerInterface(Protocol):
    def tokenize(self, text: str) -> list[int]: ...

    def detokenize(self, ids: Sequence[int]) -> str: ...

    @property
    def vocab_spec(self) -> VocabSpec: ...


class VocabFile:
    """Ordered surface list, line number = token id.

    Reserved slots hold the literals <pad>, <bos>, <eos>, <unk> and
    <sentinel_i>; everything else is a plain word (or punctuation mark).
    """

    def __init__(self, surfaces: Sequence[str]):
        surfaces = list(surfaces)
        if len(set(surfaces)) != len(surfaces):
            raise InvalidInputError("duplicate surfaces in vocab file")
        self.surfaces = surfaces

    def __len__(self) -> int:
        return len(self.surfaces)

    @classmethod
    def load(cls, path: str) -> "VocabFile":
        with open(path, "r", encoding="utf-8") as f:
            return cls([line.rstrip("\n") for line in f if line.rstrip("\n") != ""])

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for s in self.surfaces:
                f.write(s + "\n")

    @classmethod
    def build(cls, words: Iterable[str], num_sentinels: int = 0) -> "VocabFile":
        """Assemble the standard layout: specials, dot, words, sentinels on top."""
        body = []
        seen = set()
        for w in words:
            if w not in seen and w != ".":
                seen.add(w)
                body.append(w)
        surfaces = [PAD_SURFACE, BOS_SURFACE, EOS_SURFACE, UNK_SURFACE, "."]
        surfaces += body
        surfaces += [f"<sentinel_{i}>" for i in reversed(range(num_sentinels))]
        return cls(surfaces)

    def to_vocab_spec(self, num_time_tokens: int) -> VocabSpec:
        idx = {s: i for i, s in enumerate(self.surfaces)}
        for required in (PAD_SURFACE, BOS_SURFACE, EOS_SURFACE, UNK_SURFACE, "."):
            if required not in idx:
                raise InvalidInputError(f"vocab file missing {required!r}")
        num_sentinels = 0
        while f"<sentinel_{num_sentinels}>" in idx:
            expected = len(self.surfaces) - 1 - num_sentinels
            if idx[f"<sentinel_{num_sentinels}>"] != expected:
                raise InvalidInputError(
                    f"<sentinel_{num_sentinels}> must sit at id {expected}"
                )
            num_sentinels += 1
        return VocabSpec(
            text_vocab_size=len(self.surfaces),
            num_time_tokens=num_time_tokens,
            pad_id=idx[PAD_SURFACE],
            bos_id=idx[BOS_SURFACE],
            eos_id=idx[EOS_SURFACE],
            unk_id=idx[UNK_SURFACE],
            num_sentinels=num_sentinels,
            dot_id=idx["."],
        )


class ReferenceTokenizer:
    """Deterministic word-level tokenizer over a VocabFile."""

    def __init__(self, vocab_file: VocabFile, num_time_tokens: int):
        self._vocab_file = vocab_file
        self._spec = vocab_file.to_vocab_spec(num_time_tokens)
        reserved = {self._spec.pad_id, self._spec.bos_id, self._spec.eos_id} | set(
            self._spec.sentinel_ids
        )
        self._word_to_id = {
            s: i for i, s in enumerate(vocab_file.surfaces) if i not in reserved
        }

    @property
    def vocab_spec(self) -> VocabSpec:
        return self._spec

    def tokenize(self, text: str) -> list[int]:
        unk = self._spec.unk_id
        return [self._word_to_id.get(w, unk) for w in split_words(text)]

    def detokenize(self, ids: Sequence[int]) -> str:
        spec = self._spec
        parts: list[str] = []
        for i in ids:
            if not spec.is_text_id(i):
                raise InvalidTokenError(f"id {i} is not a plain text id")
            surface = self._vocab_file.surfaces[i]
            if i == spec.dot_id and parts:
                parts[-1] += "."
            else:
                parts.append(surface)
        return " ".join(parts)


def reference_tokenize(text: str, tok: ReferenceTokenizer) -> list[int]:
    return tok.tokenize(text)


def reference_detokenize(ids: Sequence[int], tok: ReferenceTokenizer) -> str:
    return tok.detokenize(ids)
