"""Dense-video-captioning evaluation: temporal IoU, localization
precision/recall/F1 across IoU thresholds, matched-pair caption scoring,
CIDEr-D and METEOR-lite caption metrics, and the order-preserving DP
story metric.

METEOR here is a reduced variant without synonym/paraphrase tables, so its
absolute values are not comparable with toolkit METEOR; relative orderings
within this package are.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .domain import EventSet, InvalidInputError
from .tokenizer import split_words

DEFAULT_IOU_THRESHOLDS = (0.3, 0.5, 0.7, 0.9)
CIDER_MAX_N = 4
CIDER_SIGMA = 6.0


@dataclass(frozen=True)
class EvalConfig:
    iou_thresholds: tuple[float, ...] = DEFAULT_IOU_THRESHOLDS
    caption_metric: str = "cider"  # cider | meteor_lite

    def __post_init__(self):
        ts = tuple(self.iou_thresholds)
        if not ts or any(not 0.0 < t <= 1.0 for t in ts) or list(ts) != sorted(set(ts)):
            raise InvalidInputError(
                "iou_thresholds must be strictly increasing fractions in (0, 1]"
            )
        if self.caption_metric not in ("cider", "meteor_lite"):
            raise InvalidInputError(f"unknown caption metric {self.caption_metric}")
        object.__setattr__(self, "iou_thresholds", ts)


def temporal_iou(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Intersection over union of two [start, end] segments."""
    (a0, a1), (b0, b1) = a, b
    if a0 > a1 or b0 > b1:
        raise InvalidInputError(f"invalid segment {a if a0 > a1 else b}")
    inter = max(0.0, min(a1, b1) - max(a0, b0))
    union = max(a1, b1) - min(a0, b0)
    if inter > 0:
        union = min(union, (a1 - a0) + (b1 - b0))
    return inter / union if union > 0 else 0.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class LocalizationResult:
    per_threshold: dict[float, dict[str, float]]
    precision: float
    recall: float
    f1: float


def localization_pr(
    preds: EventSet, refs: EventSet, cfg: EvalConfig = EvalConfig()
) -> LocalizationResult:
    """Per-threshold and threshold-averaged localization precision/recall/F1."""
    p_segs = [(ev.start, ev.end) for ev in preds.events]
    g_segs = [(ev.start, ev.end) for ev in refs.events]
    per_threshold = {}
    for tau in cfg.iou_thresholds:
        if not p_segs and not g_segs:
            prec = rec = 1.0
        elif not p_segs or not g_segs:
            prec = rec = 0.0
        else:
            prec = sum(
                1 for p in p_segs if max(temporal_iou(p, g) for g in g_segs) >= tau
            ) / len(p_segs)
            rec = sum(
                1 for g in g_segs if max(temporal_iou(p, g) for p in p_segs) >= tau
            ) / len(g_segs)
        per_threshold[tau] = {"precision": prec, "recall": rec, "f1": _f1(prec, rec)}
    avg_p = sum(v["precision"] for v in per_threshold.values()) / len(per_threshold)
    avg_r = sum(v["recall"] for v in per_threshold.values()) / len(per_threshold)
    return LocalizationResult(per_threshold, avg_p, avg_r, _f1(avg_p, avg_r))


# ---------------------------------------------------------------------------
# CIDEr


def _ngram_counts(words: Sequence[str], max_n: int = CIDER_MAX_N) -> list[Counter]:
    return [
        Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))
        for n in range(1, max_n + 1)
    ]


def build_document_frequency(
    reference_captions: Iterable[str],
) -> tuple[dict[tuple, int], int]:
    """Presence counts of n-grams over the reference corpus.

    Each reference caption is one document; returns (df table, corpus size).
    """
    df: dict[tuple, int] = defaultdict(int)
    corpus_size = 0
    for caption in reference_captions:
        corpus_size += 1
        seen = set()
        for counts in _ngram_counts(split_words(caption)):
            seen.update(counts)
        for g in seen:
            df[g] += 1
    if corpus_size == 0:
        raise InvalidInputError("empty reference corpus")
    return dict(df), corpus_size


def _tfidf_vectors(
    words: Sequence[str], df: Mapping[tuple, int], corpus_size: int
) -> tuple[list[dict], list[float]]:
    vecs, norms = [], []
    for counts in _ngram_counts(words):
        vec = {}
        for g, c in counts.items():
            idf = math.log(corpus_size / max(1, df.get(g, 0)))
            vec[g] = c * idf
        vecs.append(vec)
        norms.append(math.sqrt(sum(v * v for v in vec.values())))
    return vecs, norms


def cider(
    candidate: str,
    references: Sequence[str],
    df: Mapping[tuple, int],
    corpus_size: int,
    variant: str = "cider-d",
    sigma: float = CIDER_SIGMA,
) -> float:
    """Consensus caption score (default CIDEr-D: clipped counts + length
    penalty), averaged over n-gram orders 1..4 and over references, x10."""
    if not df:
        raise InvalidInputError("empty document-frequency table")
    if variant not in ("cider-d", "cider"):
        raise InvalidInputError(f"unknown cider variant {variant}")
    cand_words = split_words(candidate)
    c_vecs, c_norms = _tfidf_vectors(cand_words, df, corpus_size)
    total = np.zeros(CIDER_MAX_N)
    for ref in references:
        ref_words = split_words(ref)
        r_vecs, r_norms = _tfidf_vectors(ref_words, df, corpus_size)
        for n in range(CIDER_MAX_N):
            if c_norms[n] == 0 or r_norms[n] == 0:
                continue
            if variant == "cider-d":
                num = sum(
                    min(v, r_vecs[n].get(g, 0.0)) * r_vecs[n].get(g, 0.0)
                    for g, v in c_vecs[n].items()
                )
            else:
                num = sum(
                    v * r_vecs[n].get(g, 0.0) for g, v in c_vecs[n].items()
                )
            val = num / (c_norms[n] * r_norms[n])
            if variant == "cider-d":
                delta = len(cand_words) - len(ref_words)
                val *= math.exp(-(delta**2) / (2 * sigma**2))
            total[n] += val
    if not references:
        return 0.0
    return float(total.mean() / len(references) * 10.0)


# ---------------------------------------------------------------------------
# METEOR-lite

_VOWELS = set("aeiou")


def _stem(word: str) -> str:
    """Light suffix stripper standing in for a full stemmer."""
    w = word
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-2]
    elif w.endswith("s") and not w.endswith("ss") and len(w) > 3:
        w = w[:-1]
    if w.endswith("eed"):
        w = w[:-1]
    elif w.endswith("ed") and len(w) > 4 and any(ch in _VOWELS for ch in w[:-2]):
        w = w[:-2]
    elif w.endswith("ing") and len(w) > 5 and any(ch in _VOWELS for ch in w[:-3]):
        w = w[:-3]
    if w.endswith("ly") and len(w) > 4:
        w = w[:-2]
    return w


def _align(cand: list[str], ref: list[str]) -> list[tuple[int, int]]:
    """Unigram alignment: exact matches first, then stemmed matches.

    Within a pass, each candidate word prefers the reference position that
    continues the previous match, keeping chunks low.
    """
    matched_c: set[int] = set()
    matched_r: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for key in (lambda w: w, _stem):
        ref_keys = [key(w) for w in ref]
        prev_r = -1
        for ci, cw in enumerate(cand):
            if ci in matched_c:
                continue
            k = key(cw)
            options = [
                ri
                for ri, rk in enumerate(ref_keys)
                if ri not in matched_r and rk == k
            ]
            if not options:
                continue
            ri = prev_r + 1 if prev_r + 1 in options else options[0]
            pairs.append((ci, ri))
            matched_c.add(ci)
            matched_r.add(ri)
            prev_r = ri
    return sorted(pairs)


def meteor_lite(candidate: str, references: Sequence[str]) -> float:
    """Reduced METEOR: exact + stemmed unigram alignment, no synonymy.

    Best score over references of F_mean * (1 - chunk penalty).
    """
    cand = split_words(candidate)
    best = 0.0
    for ref_text in references:
        ref = split_words(ref_text)
        if not cand or not ref:
            continue
        pairs = _align(cand, ref)
        m = len(pairs)
        if m == 0:
            continue
        chunks = 1
        for (c0, r0), (c1, r1) in zip(pairs, pairs[1:]):
            if c1 != c0 + 1 or r1 != r0 + 1:
                chunks += 1
        p = m / len(cand)
        r = m / len(ref)
        f_mean = p * r / (0.9 * p + 0.1 * r)
        penalty = 0.5 * (chunks / m) ** 3
        best = max(best, f_mean * (1.0 - penalty))
    return best


# ---------------------------------------------------------------------------
# Matched-pair caption scoring and SODA

PairScorer = Callable[[str, str], float]


def make_pair_scorer(
    cfg: EvalConfig,
    df: Optional[Mapping[tuple, int]] = None,
    corpus_size: int = 0,
    normalize: bool = False,
) -> PairScorer:
    """Caption-pair scorer per the configured metric.

    normalize=True maps the score into [0, 1] (divides CIDEr by 10), the
    convention the story metric uses.
    """
    if cfg.caption_metric == "meteor_lite":
        return lambda cand, ref: meteor_lite(cand, [ref])
    if df is None:
        raise InvalidInputError("cider requires a document-frequency table")
    scale = 10.0 if normalize else 1.0
    return lambda cand, ref: cider(cand, [ref], df, corpus_size) / scale


def matched_pair_caption_score(
    preds: EventSet,
    refs: EventSet,
    pair_scorer: PairScorer,
    cfg: EvalConfig = EvalConfig(),
) -> tuple[dict[float, float], float]:
    """Caption score of each prediction against its max-IoU reference, zeroed
    below the IoU threshold; mean over predictions, then over thresholds."""
    per_threshold: dict[float, float] = {}
    pred_best: list[tuple[float, float]] = []  # (best IoU, pair score)
    for p in preds.events:
        if not refs.events:
            pred_best.append((0.0, 0.0))
            continue
        ious = [temporal_iou((p.start, p.end), (g.start, g.end)) for g in refs.events]
        j = int(np.argmax(ious))
        pred_best.append((ious[j], pair_scorer(p.caption, refs.events[j].caption)))
    for tau in cfg.iou_thresholds:
        if not pred_best:
            per_threshold[tau] = 0.0
        else:
            per_threshold[tau] = sum(
                s for iou, s in pred_best if iou >= tau
            ) / len(pred_best)
    avg = sum(per_threshold.values()) / len(per_threshold)
    return per_threshold, avg


def _monotone_dp(score: np.ndarray) -> float:
    """Max-weight order-preserving matching value over a score matrix."""
    n, m = score.shape
    c = np.zeros((n + 1, m + 1))
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            c[i, j] = max(c[i - 1, j], c[i, j - 1], c[i - 1, j - 1] + score[i - 1, j - 1])
    return float(c[n, m])


def soda(
    preds: EventSet, refs: EventSet, pair_scorer: PairScorer
) -> tuple[float, float, float]:
    """Order-preserving dense-captioning score: DP over IoU-weighted caption
    similarities of start-sorted events; returns (precision, recall, f).

    The pair scorer must be normalized to [0, 1].
    """
    p_evs = sorted(preds.events, key=lambda e: (e.start, e.end))
    g_evs = sorted(refs.events, key=lambda e: (e.start, e.end))
    n, m = len(p_evs), len(g_evs)
    if n == 0 or m == 0:
        return (1.0, 1.0, 1.0) if n == m else (0.0, 0.0, 0.0)
    score = np.zeros((n, m))
    for i, p in enumerate(p_evs):
        for j, g in enumerate(g_evs):
            iou = temporal_iou((p.start, p.end), (g.start, g.end))
            if iou > 0:
                score[i, j] = iou * pair_scorer(p.caption, g.caption)
    best = _monotone_dp(score)
    precision = best / n
    recall = best / m
    return precision, recall, _f1(precision, recall)


# ---------------------------------------------------------------------------
# Corpus-level evaluation


@dataclass
class EvalReport:
    """Per-metric results for one video (or corpus-aggregated)."""

    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    per_threshold: dict[float, dict[str, float]] = field(default_factory=dict)
    caption_score: float = 0.0
    caption_score_per_threshold: dict[float, float] = field(default_factory=dict)
    soda_precision: float = 0.0
    soda_recall: float = 0.0
    soda_f: float = 0.0

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_threshold": {
                str(t): dict(v) for t, v in sorted(self.per_threshold.items())
            },
            "caption_score": self.caption_score,
            "caption_score_per_threshold": {
                str(t): v
                for t, v in sorted(self.caption_score_per_threshold.items())
            },
            "soda_precision": self.soda_precision,
            "soda_recall": self.soda_recall,
            "soda_f": self.soda_f,
        }


def _mean_reports(reports: Sequence[EvalReport], cfg: EvalConfig) -> EvalReport:
    out = EvalReport()
    k = len(reports)
    if k == 0:
        return out
    out.precision = sum(r.precision for r in reports) / k
    out.recall = sum(r.recall for r in reports) / k
    out.f1 = sum(r.f1 for r in reports) / k
    out.caption_score = sum(r.caption_score for r in reports) / k
    out.soda_precision = sum(r.soda_precision for r in reports) / k
    out.soda_recall = sum(r.soda_recall for r in reports) / k
    out.soda_f = sum(r.soda_f for r in reports) / k
    for tau in cfg.iou_thresholds:
        out.per_threshold[tau] = {
            key: sum(r.per_threshold[tau][key] for r in reports) / k
            for key in ("precision", "recall", "f1")
        }
        out.caption_score_per_threshold[tau] = (
            sum(r.caption_score_per_threshold[tau] for r in reports) / k
        )
    return out


def _eval_one(
    pred: EventSet,
    ref: EventSet,
    cfg: EvalConfig,
    pair_scorer: PairScorer,
    soda_scorer: PairScorer,
) -> EvalReport:
    loc = localization_pr(pred, ref, cfg)
    cap_per_t, cap_avg = matched_pair_caption_score(pred, ref, pair_scorer, cfg)
    sp, sr, sf = soda(pred, ref, soda_scorer)
    return EvalReport(
        precision=loc.precision,
        recall=loc.recall,
        f1=loc.f1,
        per_threshold=loc.per_threshold,
        caption_score=cap_avg,
        caption_score_per_threshold=cap_per_t,
        soda_precision=sp,
        soda_recall=sr,
        soda_f=sf,
    )


def evaluate(
    preds: Mapping[str, EventSet],
    ref_sets: Sequence[Mapping[str, EventSet]],
    cfg: EvalConfig = EvalConfig(),
) -> dict:
    """Evaluate a prediction corpus against one or more reference sets.

    Multiple reference sets are averaged per video; missing predictions
    count as empty event sets; predictions for unknown video ids are
    reported and excluded. Corpus aggregation is the mean over videos.
    """
    if not ref_sets:
        raise InvalidInputError("at least one reference set required")
    ref_ids = sorted({vid for rs in ref_sets for vid in rs})
    unknown = sorted(set(preds) - set(ref_ids))

    df, corpus_size = None, 0
    if cfg.caption_metric == "cider":
        df, corpus_size = build_document_frequency(
            ev.caption
            for rs in ref_sets
            for es in rs.values()
            for ev in es.events
        )
    pair_scorer = make_pair_scorer(cfg, df, corpus_size, normalize=False)
    soda_scorer = make_pair_scorer(cfg, df, corpus_size, normalize=True)

    per_video: dict[str, EvalReport] = {}
    for vid in ref_ids:
        set_reports = []
        for rs in ref_sets:
            if vid not in rs:
                continue
            ref = rs[vid]
            pred = preds.get(vid, EventSet(ref.duration, ()))
            set_reports.append(_eval_one(pred, ref, cfg, pair_scorer, soda_scorer))
        per_video[vid] = _mean_reports(set_reports, cfg)

    corpus = _mean_reports(list(per_video.values()), cfg)
    return {
        "per_video": {vid: r.to_dict() for vid, r in per_video.items()},
        "corpus": corpus.to_dict(),
        "unknown_video_ids": unknown,
        "caption_metric": cfg.caption_metric,
        "iou_thresholds": list(cfg.iou_thresholds),
    }
