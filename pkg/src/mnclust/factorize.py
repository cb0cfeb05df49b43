"""Non-negative factorization of a probability matrix and the MAP labeling step."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import (
    ClusterModel,
    CountMatrix,
    Factorization,
    MnclustError,
    RankOutOfRange,
    check_probability_matrix,
)
from .lowrank import clip_negatives, normalize_columns, reduced_rank_projection

log = logging.getLogger(__name__)

FLOOR = 1e-12


@dataclass(frozen=True)
class NmfParams:
    max_iters: int = 500
    tol: float = 1e-6
    restarts: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise MnclustError("max_iters must be >= 1")
        if not self.tol > 0:
            raise MnclustError("tol must be > 0")
        if self.restarts < 0:
            raise MnclustError("restarts must be >= 0")


def _frobenius(p, w, h) -> float:
    r = p - w @ h
    return float(np.sqrt(np.einsum("ij,ij->", r, r)))


def _mu_run(p: np.ndarray, k: int, max_iters: int, tol: float, rng: np.random.Generator):
    d, T = p.shape
    w = rng.uniform(0.1, 1.1, size=(d, k))
    h = rng.uniform(0.1, 1.1, size=(k, T))
    w /= w.sum(axis=0)
    pp = float(np.einsum("ij,ij->", p, p))
    obj = _frobenius(p, w, h)
    history = [obj]
    converged = False
    for _ in range(max_iters):
        h *= (w.T @ p) / np.maximum(w.T @ w @ h, FLOOR)
        np.maximum(h, FLOOR, out=h)
        hht = h @ h.T
        pht = p @ h.T
        w *= pht / np.maximum(w @ hht, FLOOR)
        np.maximum(w, FLOOR, out=w)
        # ||P - WH||^2 expanded so the d x T residual is never formed
        sq = pp - 2.0 * np.einsum("ik,ik->", w, pht) + np.einsum("kl,kl->", w.T @ w, hht)
        new = float(np.sqrt(sq)) if sq > 1e-8 * pp else _frobenius(p, w, h)
        history.append(new)
        if obj - new <= tol * max(obj, FLOOR):
            obj = new
            converged = True
            break
        obj = new
    return w, h, obj, converged, history


def nmf(p, k: int, params: NmfParams = NmfParams()) -> Factorization:
    """Factor ``p ~ W @ H`` with multiplicative updates for the Frobenius loss.

    The best of ``params.restarts + 1`` seeded runs is kept. Columns of ``W`` are
    rescaled to sum to one and the scale is pushed into the rows of ``H``.
    """
    p = check_probability_matrix(p, atol=1e-6)
    if not 1 <= k <= min(p.shape):
        raise RankOutOfRange(f"inner dimension {k} outside 1..{min(p.shape)}")
    best = None
    for r in range(params.restarts + 1):
        rng = np.random.default_rng(params.seed + r)
        run = _mu_run(p, k, params.max_iters, params.tol, rng)
        if best is None or run[2] < best[2]:
            best = run
    w, h, obj, converged, history = best
    scale = w.sum(axis=0)
    w = w / scale
    h = h * scale[:, None]
    if not converged:
        log.debug("nmf: k=%d did not converge in %d iterations (objective %.3g)", k, params.max_iters, obj)
    return Factorization(w, h, objective=_frobenius(p, w, h), converged=converged, history=tuple(history))


def map_assign(f: Factorization, seed: int = 0) -> ClusterModel:
    """Label each column by its largest weight; exact ties are broken uniformly at random."""
    h = f.weights
    rng = np.random.default_rng(seed)
    top = h.max(axis=0)
    labels = np.empty(h.shape[1], dtype=np.int64)
    for t in range(h.shape[1]):
        tied = np.flatnonzero(h[:, t] == top[t])
        labels[t] = tied[0] if len(tied) == 1 else rng.choice(tied)
    w = f.basis / f.basis.sum(axis=0)
    return ClusterModel(labels, w, converged=f.converged)


def smoothed_probabilities(x: CountMatrix, k: int) -> np.ndarray:
    """Rank-``k`` projection of the counts, clipped at zero and column-normalized."""
    return normalize_columns(clip_negatives(reduced_rank_projection(x.entries.astype(float), k)))


def preliminary_estimate(x: CountMatrix, k: int, params: NmfParams = NmfParams()) -> ClusterModel:
    """Initial ``(labels, prototypes)`` for the Lq search: project, clip, normalize, factor, assign."""
    if not 1 <= k <= min(x.shape):
        raise RankOutOfRange(f"k={k} outside 1..{min(x.shape)}")
    p_hat = smoothed_probabilities(x, k)
    f = nmf(p_hat, k, params)
    return map_assign(f, seed=params.seed)
