"""Quantize continuous timestamps to time-token grid indices and back.

Relative mode places N grid points evenly over [0, T] (N-1 intervals, so the
video start and end are exactly representable); absolute mode makes grid
index k stand for the k-th second. Out-of-range times are clamped rather
than rejected, matching ingestion policy.
"""

from __future__ import annotations

import math

from .domain import InvalidInputError, TimeGrid, TimeMode


def encode_time(t: float, duration: float, grid: TimeGrid) -> int:
    """Map a timestamp in seconds to a grid index in [0, N)."""
    if not math.isfinite(t):
        raise InvalidInputError(f"non-finite timestamp {t}")
    n = grid.n
    if grid.mode is TimeMode.RELATIVE:
        if not (math.isfinite(duration) and duration > 0):
            raise InvalidInputError(f"duration {duration} must be positive and finite")
        # round half up so the mapping is monotone and grid points are fixed
        k = math.floor(t / duration * (n - 1) + 0.5)
    else:
        k = math.floor(t)
    return min(max(k, 0), n - 1)


def decode_time(k: int, duration: float, grid: TimeGrid) -> float:
    """Map a grid index back to the exact timestamp of that grid point."""
    if not 0 <= k < grid.n:
        raise InvalidInputError(f"grid index {k} out of [0, {grid.n})")
    if grid.mode is TimeMode.RELATIVE:
        if not (math.isfinite(duration) and duration > 0):
            raise InvalidInputError(f"duration {duration} must be positive and finite")
        return k * duration / (grid.n - 1)
    return float(k)
