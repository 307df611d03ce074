"""The evaluation suite: localization PR/F1, matched-pair CIDEr-D, and the
order-preserving story metric, on a two-video toy corpus.
"""

import json

from eventseq import EvalConfig, EventSet, evaluate

refs = {
    "v1": EventSet.build(100.0, [
        (0, 30, "a man pours oil into the pan"),
        (40, 80, "he stirs the mixture slowly"),
    ]),
    "v2": EventSet.build(60.0, [
        (5, 25, "a woman cuts an onion"),
        (30, 55, "she fries it gently"),
    ]),
}

# slightly perturbed predictions: shifted boundaries, one paraphrase
preds = {
    "v1": EventSet.build(100.0, [
        (2, 28, "a man pours oil into the pan"),
        (45, 85, "he stirs the mixture"),
    ]),
    "v2": EventSet.build(60.0, [
        (5, 25, "a woman cuts an onion"),
    ]),
}

report = evaluate(preds, [refs], EvalConfig())
corpus = report["corpus"]
print("localization: precision {precision:.3f} recall {recall:.3f} f1 {f1:.3f}"
      .format(**corpus))
print("matched-pair CIDEr-D:", round(corpus["caption_score"], 3))
print("story metric f:", round(corpus["soda_f"], 3))

print("\nper threshold:")
for tau, row in corpus["per_threshold"].items():
    print(f"  IoU>={tau}: P={row['precision']:.2f} R={row['recall']:.2f}")

print("\nperfect predictions for comparison:")
perfect = evaluate(refs, [refs])["corpus"]
print("  f1", perfect["f1"], " CIDEr-D", round(perfect["caption_score"], 6),
      " story f", perfect["soda_f"])
