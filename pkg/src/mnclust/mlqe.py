"""Maximum Lq estimation given a label map, and greedy search over label maps.

For fixed labels the optimal prototypes have a closed form, so the search
runs over labels only, scoring each labeling by the profile objective
``L*(labels; q)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import kernels
from .core import ClusterModel, CountMatrix, DimensionMismatch, EmptyCluster, MnclustError


@dataclass(frozen=True)
class SearchParams:
    q: float = 1.0
    max_sweeps: int = 100
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.q <= 1:
            raise MnclustError("q must lie in (0, 1]")
        if self.max_sweeps < 1:
            raise MnclustError("max_sweeps must be >= 1")


def cluster_counts(x: CountMatrix | np.ndarray, labels, k: int) -> np.ndarray:
    """Pool the columns of ``x`` by label into a d x k matrix."""
    a = x.entries if isinstance(x, CountMatrix) else np.asarray(x)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (a.shape[1],):
        raise DimensionMismatch("one label per column required")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise MnclustError(f"labels must lie in 0..{k - 1}")
    out = np.zeros((a.shape[0], k), dtype=a.dtype)
    for j in range(k):
        out[:, j] = a[:, labels == j].sum(axis=1)
    return out


def closed_form_prototypes(m, q: float) -> np.ndarray:
    """Maximizer of the Lq objective for pooled counts ``m``: ``Q ~ M ** (1/q)``."""
    m = np.asarray(m, dtype=float)
    if not 0 < q <= 1:
        raise MnclustError("q must lie in (0, 1]")
    sums = m.sum(axis=0)
    empty = np.flatnonzero(sums <= 0)
    if len(empty):
        raise EmptyCluster(int(empty[0]))
    if q == 1.0:
        return m / sums
    # exponentiate relative to the column max so large counts with small q stay finite
    r = (m / m.max(axis=0)) ** (1.0 / q)
    return r / r.sum(axis=0)


def profile_objective(m, q: float) -> float:
    """``L*`` for pooled counts: ``sum_k ||M_k||_{1/q}``, or the log-likelihood form at q = 1.

    Zero entries and all-zero columns contribute nothing.
    """
    if not 0 < q <= 1:
        raise MnclustError("q must lie in (0, 1]")
    return float(np.sum(kernels.cluster_values(np.asarray(m, dtype=float), float(q))))


def profile_objective_from_labels(x: CountMatrix, labels, k: int, q: float) -> float:
    return profile_objective(cluster_counts(x, labels, k), q)


def lq_objective(m, prototypes, q: float) -> float:
    """Lq objective ``sum_ik M_ik * lnq(Q_ik)`` with the q-logarithm ``(u**(1-q) - 1)/(1-q)``."""
    m = np.asarray(m, dtype=float)
    p = np.asarray(prototypes, dtype=float)
    if q == 1.0:
        with np.errstate(divide="ignore"):
            lg = np.where(m > 0, np.log(np.where(m > 0, p, 1.0)), 0.0)
        return float(np.sum(m * lg))
    return float(np.sum(m * (p ** (1.0 - q) - 1.0)) / (1.0 - q))


def refine_labels(x: CountMatrix, init: ClusterModel, params: SearchParams = SearchParams()) -> ClusterModel:
    """Greedy single-coordinate ascent on ``L*`` starting from ``init.labels``.

    Columns are visited in a fresh seeded random order each sweep and moved to
    the cluster with the largest strict gain; moves that would empty a cluster
    are refused. Stops after a sweep with no moves or ``params.max_sweeps``.
    """
    if init.T != x.T:
        raise DimensionMismatch("model and data disagree on T")
    K = init.K
    xf = np.ascontiguousarray(x.entries, dtype=np.float64)
    labels = np.array(init.labels, dtype=np.int64)
    m = np.ascontiguousarray(cluster_counts(xf, labels, K), dtype=np.float64)
    sizes = np.bincount(labels, minlength=K).astype(np.int64)
    rng = np.random.default_rng(params.seed)
    converged = False
    for _ in range(params.max_sweeps):
        order = rng.permutation(x.T).astype(np.int64)
        if kernels.refine_sweep(xf, m, sizes, labels, order, float(params.q)) == 0:
            converged = True
            break
    return model_from_labels(x, labels, K, params.q, converged=converged)


def model_from_labels(x: CountMatrix, labels, k: int, q: float = 1.0, converged: bool = True) -> ClusterModel:
    """Attach closed-form prototypes to ``labels``; empty clusters get a uniform placeholder."""
    m = cluster_counts(x, labels, k).astype(float)
    protos = np.full(m.shape, 1.0 / m.shape[0])
    live = m.sum(axis=0) > 0
    if live.any():
        protos[:, live] = closed_form_prototypes(m[:, live], q)
    return ClusterModel(labels, protos, converged=converged)
