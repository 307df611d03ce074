"""Weighted sequence negative log-likelihood over a log-probability matrix.

The matrix holds one row per autoregressive transition: row k gives the
predicted log-distribution (natural log) over the joint vocabulary for the
token at position k+1 of the target.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .domain import InvalidInputError
from .tokenizer import InvalidTokenError


def validate_logprob_rows(logprobs: np.ndarray, atol: float = 1e-6) -> None:
    """Debug check: each row must be a normalized log-distribution."""
    lse = np.logaddexp.reduce(logprobs, axis=1)
    bad = np.flatnonzero(~np.isclose(lse, 0.0, atol=atol))
    if bad.size:
        raise InvalidInputError(
            f"rows {bad[:5].tolist()} do not normalize (logsumexp != 0)"
        )


def sequence_nll(
    target: Sequence[int],
    logprobs: np.ndarray,
    weights: Optional[Sequence[float]] = None,
    check_rows: bool = False,
) -> float:
    """-(sum_k w_k * log p(target[k+1] | ...)) / sum_k w_k.

    logprobs must have len(target)-1 rows; weights default to all ones.
    """
    target = np.asarray(target, dtype=np.int64)
    logprobs = np.asarray(logprobs, dtype=np.float64)
    if logprobs.ndim != 2 or logprobs.shape[0] != len(target) - 1:
        raise InvalidInputError(
            f"logprobs shape {logprobs.shape} does not match target length {len(target)}"
        )
    if weights is None:
        w = np.ones(len(target) - 1)
    else:
        w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(target) - 1,):
        raise InvalidInputError(f"weights shape {w.shape} mismatch")
    if np.any(w < 0) or not np.any(w > 0):
        raise InvalidInputError("weights must be nonnegative and not all zero")
    next_ids = target[1:]
    if np.any(next_ids < 0) or np.any(next_ids >= logprobs.shape[1]):
        raise InvalidTokenError("target id outside the vocabulary")
    if check_rows:
        validate_logprob_rows(logprobs)
    picked = logprobs[np.arange(len(next_ids)), next_ids]
    return float(-(w @ picked) / w.sum())
