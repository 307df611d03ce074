"""Event sequences: one flat token stream carrying both times and text.

Each event contributes its start/end time tokens plus its caption tokens,
events ordered by start time, captions separated by dots. Decoding reverses
the construction and tolerates malformed model output.
"""

from eventseq import (
    EventSet,
    ReferenceTokenizer,
    SeqConfig,
    TimeGrid,
    TimeMode,
    TimePosition,
    VocabFile,
    decode_event_sequence,
    encode_event_set,
    strip_time_tokens,
)

tok = ReferenceTokenizer(VocabFile.build(["add", "oil", "stir", "the", "pan"]), 100)
vocab = tok.vocab_spec
grid = TimeGrid(TimeMode.RELATIVE, 100)

es = EventSet.build(120.0, [(0, 60, "add oil"), (60, 120, "stir the pan")])
cfg = SeqConfig(TimePosition.BEFORE_TEXT, use_dot_separator=True)
seq = encode_event_set(es, cfg, grid, tok, vocab)
print("encoded:", seq)
print("  (time tokens are ids >=", vocab.text_vocab_size, ")")

res = decode_event_sequence(seq, 120.0, cfg, grid, tok, vocab)
for ev in res.event_set.events:
    print(f"decoded: [{ev.start:6.2f}, {ev.end:6.2f}] {ev.caption!r}")

print("\nparagraph mode (time tokens stripped):",
      tok.detokenize([t for t in strip_time_tokens(seq, vocab)
                      if vocab.is_text_id(t)]))

# a malformed sequence: decoder skips what it cannot parse
broken = [vocab.bos_id, vocab.text_vocab_size + 10, seq[3], vocab.eos_id]
res = decode_event_sequence(broken, 120.0, cfg, grid, tok, vocab)
print(f"\nmalformed input -> {len(res.event_set.events)} events, "
      f"{res.skipped_tokens} tokens skipped")
