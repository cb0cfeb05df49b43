"""Partition agreement, divergences and the weighted discrepancy functional."""
from __future__ import annotations

import math

import numpy as np

from .core import DimensionMismatch, LengthMismatch, MnclustError


def _comb2(v):
    v = np.asarray(v, dtype=float)
    return v * (v - 1) / 2


def contingency(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def adjusted_rand_index(a, b) -> float:
    """Adjusted Rand index (pair-counting form, corrected for chance) of two labelings.

    Returns 1.0 when both labelings are the same trivial partition (all in one
    cluster, or all singletons), where the index is otherwise 0/0.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"label vectors differ in shape: {a.shape} vs {b.shape}")
    if a.size < 2:
        raise MnclustError("need at least two items")
    table = contingency(a, b)
    index = _comb2(table).sum()
    rows = _comb2(table.sum(axis=1)).sum()
    cols = _comb2(table.sum(axis=0)).sum()
    expected = rows * cols / _comb2(a.size)
    top = 0.5 * (rows + cols)
    if top == expected:
        return 1.0
    return float((index - expected) / (top - expected))


def entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def column_entropies(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0).sum(axis=0)


def kl_divergence(p, q) -> float:
    """``sum p log(p/q)``; ``inf`` when ``p`` puts mass where ``q`` has none."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise LengthMismatch("distributions differ in length")
    pos = p > 0
    if np.any(q[pos] <= 0):
        return math.inf
    return float(np.sum(p[pos] * np.log(p[pos] / q[pos])))


def weighted_discrepancy_phi(p_eval, x_expected, trial_counts, true_labels, k_true: int) -> float:
    """``-sum_{t,i} E[X_it] log P_it / (N_t * n_k(t)**2)`` with ``n_k`` the true cluster sizes."""
    p = np.asarray(p_eval, dtype=float)
    ex = np.asarray(x_expected, dtype=float)
    n = np.asarray(trial_counts, dtype=float)
    labels = np.asarray(true_labels, dtype=np.int64)
    if p.shape != ex.shape or n.shape != (p.shape[1],) or labels.shape != (p.shape[1],):
        raise DimensionMismatch("inconsistent shapes for phi")
    sizes = np.bincount(labels, minlength=k_true).astype(float)
    weight = 1.0 / (n * sizes[labels] ** 2)
    pos = ex > 0
    with np.errstate(divide="ignore"):
        lg = np.where(pos, np.log(np.where(pos, p, 1.0)), 0.0)
    return float(-np.sum(ex * lg * weight[None, :]))


def theorem1_limit_constant(z_bars, n_bars, lambda_bars) -> float:
    """Limit of the scaled bias: ``0.5 * sum_k (Z_k - 1) / (n_k * lambda_k)``."""
    z = np.asarray(z_bars, dtype=float)
    n = np.asarray(n_bars, dtype=float)
    lam = np.asarray(lambda_bars, dtype=float)
    if not (z.shape == n.shape == lam.shape):
        raise LengthMismatch("z_bars, n_bars and lambda_bars must have equal lengths")
    if np.any(z <= 0) or np.any(n <= 0) or np.any(lam <= 0):
        raise MnclustError("all inputs must be positive")
    return float(0.5 * np.sum((z - 1) / (n * lam)))
