"""Beam search with length normalization over a toy bigram scorer.

Hypotheses are ranked by sum-logprob / len^alpha. A wider beam can surface
a sequence greedy decoding misses.
"""

from eventseq import BeamConfig, NGramScorer, beam_decode, greedy_decode

# vocab {0: "a", 1: "b", 2: EOS}; greedy takes "a" first and then loops on
# the tie (lowest id wins), while starting with "b" reaches EOS cheaply.
scorer = NGramScorer(2, {
    (): [0.55, 0.45, 0.0],
    (0,): [0.45, 0.10, 0.45],
    (1,): [0.02, 0.03, 0.95],
})

cfg = BeamConfig(beam_size=4, length_norm_alpha=0.6, max_length=6, eos_id=2)
print("greedy:", greedy_decode(scorer, cfg))
best, ranked = beam_decode(scorer, cfg)
print("beam best:", best)
print("ranked beam:")
for tokens, score in ranked[:4]:
    print(f"  {tokens}  normalized score {score:.4f}")

print("\nalpha=0 (no normalization):")
best0, _ = beam_decode(scorer, BeamConfig(4, 0.0, 6, 2))
print("  best:", best0)
