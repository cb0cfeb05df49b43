"""Reduced-rank smoothing, truncation and the clip/normalize step."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CountMatrix, DimensionMismatch, MnclustError, RankOutOfRange

DEGENERATE_COLUMN_SUM = 1e-12


@dataclass(frozen=True)
class TruncationParams:
    cap: float
    rank: int

    def __post_init__(self):
        if not self.cap > 0:
            raise MnclustError("cap must be > 0")
        if self.rank < 1:
            raise MnclustError("rank must be >= 1")


def reduced_rank_projection(m, k: int) -> np.ndarray:
    """Best rank-``k`` approximation of ``m`` in Frobenius norm (truncated SVD)."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch("expected a 2-d matrix")
    if not 1 <= k <= min(m.shape):
        raise RankOutOfRange(f"rank {k} outside 1..{min(m.shape)}")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return (u[:, :k] * s[:k]) @ vt[:k]


def clip_negatives(m) -> np.ndarray:
    return np.maximum(np.asarray(m, dtype=float), 0.0)


def normalize_columns(m) -> np.ndarray:
    """Scale columns to sum to one; near-zero columns become uniform."""
    m = np.asarray(m, dtype=float)
    if np.any(m < 0):
        raise MnclustError("normalize_columns expects a non-negative matrix")
    sums = m.sum(axis=0)
    out = np.empty_like(m)
    ok = sums >= DEGENERATE_COLUMN_SUM
    out[:, ok] = m[:, ok] / sums[ok]
    out[:, ~ok] = 1.0 / m.shape[0]
    return out


def truncate_counts(x: CountMatrix | np.ndarray, cap: float) -> np.ndarray:
    if not cap > 0:
        raise MnclustError("cap must be > 0")
    a = x.entries if isinstance(x, CountMatrix) else np.asarray(x)
    return np.minimum(a, cap)


def truncated_projection(x: CountMatrix | np.ndarray, params: TruncationParams) -> np.ndarray:
    """Truncate entries at ``params.cap`` and project to rank ``params.rank``."""
    return reduced_rank_projection(truncate_counts(x, params.cap).astype(float), params.rank)


def projection_mse(estimate, truth) -> float:
    a = np.asarray(estimate, dtype=float)
    b = np.asarray(truth, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))
