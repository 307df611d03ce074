import random

import pytest

from eventseq.domain import EventSet, InvalidInputError, SeqConfig
from eventseq.transforms import (
    CorruptionConfig,
    TrainingExample,
    corrupt_spans,
    few_shot_subset,
    make_generative_example,
    pseudo_label,
    temporal_crop,
)

from conftest import WORDS, random_event_set


def reconstruct(corrupted, target, vocab):
    """Splice target spans back at sentinel positions."""
    spans = {}
    current = None
    for t in target:
        if t in vocab.sentinel_ids:
            current = t
            spans[current] = []
        elif current is not None and t != vocab.eos_id:
            spans[current].append(t)
    out = []
    for t in corrupted:
        if t in vocab.sentinel_ids:
            out.extend(spans.get(t, []))
        else:
            out.append(t)
    return out


class TestPseudoLabel:
    def test_identity_mapping(self):
        es = pseudo_label([(1.0, 4.0, "so today we ski")], 10.0)
        assert es.events[0] == es.events[0].__class__(1.0, 4.0, "so today we ski")

    def test_clamping(self):
        es = pseudo_label([(-2, 5, "x")], 10.0)
        assert (es.events[0].start, es.events[0].end) == (0.0, 5.0)

    def test_ordering(self):
        es = pseudo_label([(3, 4, "a"), (1, 2, "b")], 10.0)
        assert [ev.caption for ev in es.events] == ["b", "a"]

    def test_drops_blank_sentences(self):
        es = pseudo_label([(0, 1, "  "), (1, 2, "ok")], 10.0)
        assert [ev.caption for ev in es.events] == ["ok"]

    def test_invalid_duration(self):
        with pytest.raises(InvalidInputError):
            pseudo_label([], 0.0)

    def test_idempotent_on_clean_transcripts(self):
        triples = [(1.0, 2.0, "a"), (3.0, 4.0, "b")]
        once = pseudo_label(triples, 10.0)
        twice = pseudo_label(
            [(ev.start, ev.end, ev.caption) for ev in once.events], 10.0
        )
        assert once == twice


class TestGenerativeExample:
    def test_empty_transcript(self, grid, tokenizer, vocab):
        ex = make_generative_example([], 10.0, SeqConfig(), grid, tokenizer, vocab)
        assert list(ex.decoder_target) == [vocab.bos_id, vocab.eos_id]
        assert ex.kind == "generative"
        assert ex.encoder_text is None

    def test_matches_transcript_sequence(self, grid, tokenizer, vocab):
        from eventseq.seq_codec import transcript_to_sequence

        transcript = [(0.0, 5.0, "add oil")]
        ex = make_generative_example(
            transcript, 10.0, SeqConfig(), grid, tokenizer, vocab
        )
        expected = transcript_to_sequence(
            pseudo_label(transcript, 10.0), SeqConfig(), grid, tokenizer, vocab
        )
        assert list(ex.decoder_target) == expected

    def test_generative_rejects_encoder_text(self):
        with pytest.raises(InvalidInputError):
            TrainingExample(decoder_target=(1, 2), kind="generative", encoder_text=(3,))


class TestCorruptSpans:
    def make_seq(self, vocab, n=60, seed=3):
        rng = random.Random(seed)
        text_ids = [i for i in range(vocab.text_vocab_size) if vocab.is_text_id(i)]
        body = rng.choices(text_ids, k=n)
        return [vocab.bos_id] + body + [vocab.eos_id]

    def test_p_zero_masks_nothing(self, vocab):
        seq = self.make_seq(vocab)
        res = corrupt_spans(seq, CorruptionConfig(0.0, 3.0, 1), vocab)
        assert list(res.corrupted) == seq
        assert list(res.target) == [vocab.eos_id]
        assert res.num_spans == 0

    def test_p_one_single_span(self, vocab):
        seq = self.make_seq(vocab, n=12)
        res = corrupt_spans(seq, CorruptionConfig(1.0, 100.0, 1), vocab)
        assert list(res.corrupted) == [vocab.bos_id, vocab.sentinel_id(0), vocab.eos_id]
        assert list(res.target) == [vocab.sentinel_id(0)] + seq[1:-1] + [vocab.eos_id]

    def test_deterministic(self, vocab):
        seq = self.make_seq(vocab)
        cc = CorruptionConfig(0.3, 2.0, 42)
        assert corrupt_spans(seq, cc, vocab) == corrupt_spans(seq, cc, vocab)

    def test_rejects_sentinels_in_input(self, vocab):
        with pytest.raises(InvalidInputError):
            corrupt_spans([vocab.sentinel_id(0)], CorruptionConfig(0.5, 3.0, 1), vocab)

    def test_span_cap_reported(self, vocab):
        seq = self.make_seq(vocab, n=400, seed=9)
        # P=0.5, M=1 wants ~200 spans, far beyond 32 sentinels
        res = corrupt_spans(seq, CorruptionConfig(0.5, 1.0, 5), vocab)
        assert res.spans_capped
        assert res.num_spans == vocab.num_sentinels

    def test_reconstruction_fuzz(self, vocab):
        rng = random.Random(0)
        for trial in range(50):
            n = rng.randint(1, 120)
            seq = self.make_seq(vocab, n=n, seed=trial)
            cc = CorruptionConfig(rng.random(), 1.0 + rng.random() * 5, trial)
            res = corrupt_spans(seq, cc, vocab)
            assert reconstruct(res.corrupted, res.target, vocab) == seq

    def test_masking_statistics(self):
        from eventseq.tokenizer import ReferenceTokenizer, VocabFile

        from conftest import WORDS

        # enough sentinels for ~500 spans on a 10k-token sequence
        vocab = ReferenceTokenizer(
            VocabFile.build(WORDS, num_sentinels=700), 100
        ).vocab_spec
        seq = self.make_seq(vocab, n=10_000, seed=1)
        fractions, lengths = [], []
        for seed in range(20):
            res = corrupt_spans(seq, CorruptionConfig(0.15, 3.0, seed), vocab)
            masked = len(res.target) - res.num_spans - 1
            fractions.append(masked / 10_000)
            lengths.append(masked / res.num_spans)
        mean_frac = sum(fractions) / len(fractions)
        mean_len = sum(lengths) / len(lengths)
        assert 0.135 <= mean_frac <= 0.165
        assert 2.55 <= mean_len <= 3.45


class TestTemporalCrop:
    def test_full_window_is_identity(self):
        es = EventSet.build(10.0, [(0, 5, "a"), (6, 9, "b")])
        assert temporal_crop(es, 0, window=(0.0, 10.0)) == es

    def test_clipping_and_reanchoring(self):
        es = EventSet.build(10.0, [(0, 5, "a"), (6, 9, "b")])
        out = temporal_crop(es, 0, window=(5.5, 10.0))
        assert len(out.events) == 1
        assert out.events[0].start == pytest.approx(0.5)
        assert out.events[0].end == pytest.approx(3.5)
        assert out.duration == pytest.approx(4.5)

    def test_max_narrations(self):
        es = EventSet.build(30.0, [(0, 5, "a"), (10, 15, "b"), (20, 25, "c")])
        for seed in range(20):
            out = temporal_crop(es, seed, max_narrations=1)
            assert len(out.events) <= 1

    def test_output_always_valid(self):
        from eventseq.domain import validate_event_set

        rng = random.Random(5)
        for seed in range(50):
            es = random_event_set(rng)
            out = temporal_crop(es, seed)
            assert validate_event_set(out) == []
            assert out.duration >= 0.1 * es.duration - 1e-9

    def test_deterministic(self):
        es = EventSet.build(10.0, [(0, 5, "a"), (6, 9, "b")])
        assert temporal_crop(es, 123) == temporal_crop(es, 123)


class TestFewShotSubset:
    def corpus(self, n):
        es = EventSet.build(10.0, [(0, 5, "x")])
        return {f"vid{i:04d}": es for i in range(n)}

    def test_full_fraction(self):
        corpus = self.corpus(10)
        assert few_shot_subset(corpus, 1.0, 0) == corpus

    def test_ceil_rule(self):
        assert len(few_shot_subset(self.corpus(200), 0.01, 0)) == 2

    def test_deterministic(self):
        corpus = self.corpus(50)
        assert few_shot_subset(corpus, 0.3, 7) == few_shot_subset(corpus, 0.3, 7)

    def test_fraction_bounds(self):
        with pytest.raises(InvalidInputError):
            few_shot_subset(self.corpus(5), 0.0, 0)
        with pytest.raises(InvalidInputError):
            few_shot_subset(self.corpus(5), 1.5, 0)
