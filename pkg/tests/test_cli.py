import json
import math

import numpy as np
import pytest

from eventseq.cli import main, write_logprob_matrix
from eventseq.domain import EventSet
from eventseq.tokenizer import VocabFile

from conftest import WORDS


@pytest.fixture
def vocab_path(tmp_path):
    path = tmp_path / "vocab.txt"
    VocabFile.build(WORDS, num_sentinels=32).save(str(path))
    return str(path)


@pytest.fixture
def annotations_path(tmp_path):
    es = EventSet.build(120.0, [(0, 60, "add oil"), (60, 120, "stir")])
    path = tmp_path / "annotations.json"
    path.write_text(json.dumps(es.to_dict()))
    return str(path)


def read_json(path):
    with open(path) as f:
        return json.load(f)


def test_encode_golden(tmp_path, vocab_path, annotations_path, tokenizer, vocab):
    out = tmp_path / "tokens.json"
    rc = main([
        "encode", "--annotations", annotations_path, "--vocab", vocab_path,
        "--out", str(out),
    ])
    assert rc == 0
    v = vocab.text_vocab_size
    add, oil, stir = (tokenizer.tokenize(w)[0] for w in ("add", "oil", "stir"))
    assert read_json(out) == [
        vocab.bos_id, v + 0, v + 50, add, oil, vocab.dot_id,
        v + 50, v + 99, stir, vocab.dot_id, vocab.eos_id,
    ]


def test_encode_decode_round_trip(tmp_path, vocab_path, annotations_path):
    tokens = tmp_path / "tokens.json"
    events = tmp_path / "events.json"
    assert main(["encode", "--annotations", annotations_path,
                 "--vocab", vocab_path, "--out", str(tokens)]) == 0
    assert main(["decode", "--tokens", str(tokens), "--vocab", vocab_path,
                 "--duration", "120", "--out", str(events)]) == 0
    decoded = read_json(events)
    assert [e["caption"] for e in decoded["events"]] == ["add oil.", "stir."]
    assert decoded["skipped_tokens"] == 0


def test_pseudo_label(tmp_path):
    transcript = {"duration": 10.0,
                  "events": [{"start": -2, "end": 5, "caption": "x"},
                             {"start": 6, "end": 7, "caption": "  "}]}
    src = tmp_path / "t.json"
    src.write_text(json.dumps(transcript))
    out = tmp_path / "out.json"
    assert main(["pseudo-label", "--transcript", str(src), "--out", str(out)]) == 0
    result = read_json(out)
    assert result["events"] == [{"start": 0.0, "end": 5.0, "caption": "x"}]


def test_corrupt_deterministic(tmp_path, vocab):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(vocab.to_dict()))
    tokens = tmp_path / "tokens.json"
    body = [i for i in range(vocab.text_vocab_size) if vocab.is_text_id(i)][:30]
    tokens.write_text(json.dumps([vocab.bos_id] + body + [vocab.eos_id]))
    out1, out2 = tmp_path / "o1.json", tmp_path / "o2.json"
    argv = ["corrupt", "--tokens", str(tokens), "--vocab-spec", str(spec_path),
            "--seed", "9"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_crop_and_subset(tmp_path, annotations_path):
    out = tmp_path / "cropped.json"
    assert main(["crop", "--annotations", annotations_path, "--seed", "4",
                 "--out", str(out)]) == 0
    cropped = read_json(out)
    assert cropped["duration"] > 0

    corpus = {f"v{i}": read_json(annotations_path) for i in range(10)}
    corpus_path = tmp_path / "corpus.json"
    corpus_path.write_text(json.dumps(corpus))
    sub = tmp_path / "subset.json"
    assert main(["subset", "--corpus", str(corpus_path), "--fraction", "0.3",
                 "--seed", "1", "--out", str(sub)]) == 0
    assert len(read_json(sub)) == 3


def test_loss_subcommand(tmp_path):
    target = tmp_path / "target.json"
    target.write_text(json.dumps([0, 1, 2, 3, 4]))
    lp = tmp_path / "lp.bin"
    write_logprob_matrix(str(lp), np.full((4, 10), math.log(0.1)))
    out = tmp_path / "loss.json"
    assert main(["loss", "--target", str(target), "--logprobs", str(lp),
                 "--out", str(out)]) == 0
    assert read_json(out)["loss"] == pytest.approx(math.log(10), abs=1e-12)


def test_decode_run(tmp_path):
    scorer = {
        "order": 2,
        "table": {
            "": [1.0, 0.0, 0.0],
            "0": [0.0, 1.0, 0.0],
            "1": [0.0, 0.0, 1.0],
        },
    }
    path = tmp_path / "scorer.json"
    path.write_text(json.dumps(scorer))
    out = tmp_path / "decoded.json"
    assert main(["decode-run", "--scorer", str(path), "--eos-id", "2",
                 "--max-length", "10", "--out", str(out)]) == 0
    assert read_json(out)["best"] == [0, 1, 2]


def test_eval_identity(tmp_path):
    refs = {
        "v1": EventSet.build(
            100.0,
            [(0, 30, "a man pours oil into the pan"),
             (40, 80, "the mixture simmers slowly")],
        ).to_dict()
    }
    refs_path = tmp_path / "refs.json"
    refs_path.write_text(json.dumps(refs))
    report_path = tmp_path / "report.json"
    assert main(["eval", "--preds", str(refs_path), "--refs", str(refs_path),
                 "--report", str(report_path)]) == 0
    report = read_json(report_path)
    assert report["corpus"]["f1"] == pytest.approx(1.0, abs=1e-9)


def test_unknown_subcommand_exit_1(capsys):
    assert main(["frobnicate"]) == 1
    err = capsys.readouterr().err
    assert json.loads(err.strip())["error"] == "usage"


def test_missing_file_exit_2(capsys, vocab_path):
    assert main(["encode", "--annotations", "/nonexistent.json",
                 "--vocab", vocab_path]) == 2
    err = capsys.readouterr().err
    assert json.loads(err.strip())["error"]


def test_config_file_defaults(tmp_path, vocab_path, annotations_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"time-position": "after", "dot": "off"}))
    out_cfg = tmp_path / "a.json"
    out_flag = tmp_path / "b.json"
    assert main(["encode", "--annotations", annotations_path, "--vocab", vocab_path,
                 "--config", str(cfg), "--out", str(out_cfg)]) == 0
    # explicit flag beats the config file
    assert main(["encode", "--annotations", annotations_path, "--vocab", vocab_path,
                 "--config", str(cfg), "--time-position", "after",
                 "--dot", "on", "--out", str(out_flag)]) == 0
    a, b = read_json(out_cfg), read_json(out_flag)
    assert a != b


def test_selftest_subcommand():
    assert main(["selftest"]) == 0
