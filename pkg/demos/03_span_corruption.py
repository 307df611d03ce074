"""Denoising targets: masking token spans with sentinel ids.

Random spans of the speech sequence are replaced by unique sentinels; the
target lists each sentinel followed by the tokens it hid. Splicing the
spans back reproduces the original sequence exactly.
"""

from eventseq import CorruptionConfig, ReferenceTokenizer, VocabFile, corrupt_spans

tok = ReferenceTokenizer(
    VocabFile.build(["add", "oil", "stir", "the", "pan", "heat", "mix", "bowl"],
                    num_sentinels=8),
    100,
)
vocab = tok.vocab_spec

words = "add oil the pan stir the mix heat the bowl stir the pan add oil"
seq = [vocab.bos_id] + tok.tokenize(words) + [vocab.eos_id]
print("input:    ", seq)

res = corrupt_spans(seq, CorruptionConfig(0.3, 2.0, rng_seed=4), vocab)
print("corrupted:", list(res.corrupted))
print("target:   ", list(res.target))
print("spans:    ", res.num_spans)

# reconstruct: splice each sentinel's span back in
spans, current = {}, None
for t in res.target:
    if t in vocab.sentinel_ids:
        current = t
        spans[current] = []
    elif t != vocab.eos_id:
        spans[current].append(t)
rebuilt = []
for t in res.corrupted:
    rebuilt.extend(spans[t] if t in vocab.sentinel_ids else [t])
print("round trip ok:", rebuilt == seq)
