"""Sequence-level machinery for dense video captioning as seq2seq:
time-token codecs, event-sequence encoding/decoding, weak-supervision
transforms, the training loss, beam-search decoding and evaluation metrics.
"""

from .domain import (
    Event,
    EventSet,
    InvalidInputError,
    SeqConfig,
    TimeGrid,
    TimeMode,
    TimePosition,
    VocabSpec,
    validate_event_set,
)
from .time_codec import decode_time, encode_time
from .tokenizer import ReferenceTokenizer, VocabFile
from .seq_codec import (
    DecodeResult,
    decode_event_sequence,
    encode_event_set,
    strip_time_tokens,
    transcript_to_sequence,
    truncate_or_pad,
)
from .transforms import (
    CorruptionConfig,
    TrainingExample,
    corrupt_spans,
    few_shot_subset,
    make_generative_example,
    pseudo_label,
    temporal_crop,
)
from .loss import sequence_nll
from .decoder import BeamConfig, NGramScorer, beam_decode, decode_to_events, greedy_decode
from .metrics import (
    EvalConfig,
    EvalReport,
    build_document_frequency,
    cider,
    evaluate,
    localization_pr,
    matched_pair_caption_score,
    meteor_lite,
    soda,
    temporal_iou,
)

__version__ = "0.1.0"
