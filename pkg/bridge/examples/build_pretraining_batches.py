"""Build pretraining batches from a transcript corpus through the binding.

Reads a video-id -> transcript JSON corpus, then for each video builds the
generative target (full speech sequence) and a denoising pair (span
corruption of that sequence), batching by padded length.

Usage: python build_pretraining_batches.py transcripts.json vocab.txt out.json
"""

import json
import sys
import zlib

from eventseq_bridge import bind, corrupt, encode

BATCH_SIZE = 4
TARGET_LENGTH = 64


def pad(ids, length, pad_id):
    return (ids + [pad_id] * length)[:length]


def main(transcripts_path, vocab_path, out_path):
    with open(transcripts_path) as f:
        corpus = json.load(f)
    with open(vocab_path) as f:
        vocab = [line.rstrip("\n") for line in f if line.rstrip("\n")]

    # derive the id layout once; the binding mirrors the CLI flags
    num_sentinels = sum(1 for s in vocab if s.startswith("<sentinel_"))
    spec = {
        "V": len(vocab), "N": 100,
        "pad": vocab.index("<pad>"), "bos": vocab.index("<bos>"),
        "eos": vocab.index("<eos>"), "unk": vocab.index("<unk>"),
        "num_sentinels": num_sentinels, "dot": vocab.index("."),
    }

    examples = []
    for vid, transcript in sorted(corpus.items()):
        labeled = bind("pseudo-label", {"transcript": transcript})
        speech_seq = encode({"annotations": labeled, "vocab": vocab})
        pair = corrupt({
            "tokens": speech_seq, "vocab_spec": spec,
            "mask_probability": 0.15, "mean_span_length": 3.0,
            "seed": zlib.crc32(vid.encode()),
        })
        examples.append({
            "video_id": vid,
            "generative_target": pad(speech_seq, TARGET_LENGTH, spec["pad"]),
            "denoising_input": pad(pair["corrupted"], TARGET_LENGTH, spec["pad"]),
            "denoising_target": pad(pair["target"], TARGET_LENGTH, spec["pad"]),
        })

    batches = [
        examples[i : i + BATCH_SIZE] for i in range(0, len(examples), BATCH_SIZE)
    ]
    with open(out_path, "w") as f:
        json.dump(batches, f, indent=2)
    print(f"wrote {len(batches)} batches ({len(examples)} examples) to {out_path}")


if __name__ == "__main__":
    if len(sys.argv) != 4:
        print(__doc__)
        sys.exit(1)
    main(*sys.argv[1:])
