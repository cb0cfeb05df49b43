"""Comparison pipelines: PAM with silhouette width, and a spectral elbow plus k-means."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._accel import kernels
from .core import CountMatrix, MnclustError


class BaselineResult(NamedTuple):
    labels: np.ndarray
    k: int
    degenerate: bool = False


def _columns(x) -> np.ndarray:
    a = x.entries if isinstance(x, CountMatrix) else np.asarray(x)
    return a.astype(float)


def column_distances(x) -> np.ndarray:
    a = _columns(x)
    sq = (a * a).sum(axis=0)
    d2 = sq[:, None] + sq[None, :] - 2.0 * a.T @ a
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(np.maximum(d2, 0.0))


def pam_build(dist: np.ndarray, k: int) -> np.ndarray:
    """Greedy BUILD: start from the most central point, then add the medoid that most reduces cost."""
    n = dist.shape[0]
    medoids = [int(np.argmin(dist.sum(axis=1)))]
    nearest = dist[:, medoids[0]].copy()
    while len(medoids) < k:
        gains = np.maximum(nearest[:, None] - dist, 0.0).sum(axis=0)
        gains[medoids] = -1.0
        h = int(np.argmax(gains))
        medoids.append(h)
        nearest = np.minimum(nearest, dist[:, h])
    return np.array(medoids, dtype=np.int64)


def pam_cost(dist: np.ndarray, medoids) -> float:
    return float(dist[:, medoids].min(axis=1).sum())


def pam(dist: np.ndarray, k: int, max_swaps: int = 1000, trace: list | None = None):
    """Partition around medoids (BUILD then best-improvement SWAP). Returns ``(labels, medoids)``."""
    dist = np.ascontiguousarray(dist, dtype=float)
    n = dist.shape[0]
    if not 1 <= k <= n:
        raise MnclustError(f"k={k} outside 1..{n}")
    medoids = pam_build(dist, k)
    if trace is not None:
        trace.append(pam_cost(dist, medoids))
    for _ in range(max_swaps):
        if not kernels.pam_swap(dist, medoids):
            break
        if trace is not None:
            trace.append(pam_cost(dist, medoids))
    labels = np.argmin(dist[:, medoids], axis=1)
    return labels.astype(np.int64), medoids


def silhouette_values(dist: np.ndarray, labels) -> np.ndarray:
    """Per-point ``(b - a) / max(a, b)``; zero for members of singleton clusters."""
    labels = np.asarray(labels)
    ks = np.unique(labels)
    n = len(labels)
    s = np.zeros(n)
    if len(ks) < 2:
        return s
    sums = np.column_stack([dist[:, labels == k].sum(axis=1) for k in ks])
    sizes = np.array([(labels == k).sum() for k in ks], dtype=float)
    own = np.searchsorted(ks, labels)
    for i in range(n):
        m = sizes[own[i]]
        if m <= 1:
            continue
        a = sums[i, own[i]] / (m - 1)
        other = sums[i] / sizes
        other[own[i]] = np.inf
        b = other.min()
        top = max(a, b)
        s[i] = 0.0 if top == 0 else (b - a) / top
    return s


def pam_silhouette(x, k_range=None) -> BaselineResult:
    """Cluster columns by PAM on Euclidean distances; pick ``k`` by mean silhouette width."""
    dist = column_distances(x)
    T = dist.shape[0]
    if T < 2:
        raise MnclustError("need at least two columns")
    if T == 2:
        # silhouette is undefined for k = T; two singleton clusters by convention
        return BaselineResult(np.array([0, 1], dtype=np.int64), 2, True)
    ks = list(k_range) if k_range is not None else list(range(2, T))
    ks = [k for k in ks if 2 <= k <= T - 1]
    if not ks:
        raise MnclustError("k_range must intersect 2..T-1")
    best = None
    for k in ks:
        labels, _ = pam(dist, k)
        width = float(silhouette_values(dist, labels).mean())
        if best is None or width > best[0] + 1e-12:
            best = (width, k, labels)
    return BaselineResult(best[2], best[1])


def profile_likelihood_elbow(values) -> int:
    """Elbow of a decreasing sequence by the two-group Gaussian profile likelihood.

    Splits with a zero degrees-of-freedom variance estimate are skipped; a
    split that fits both groups exactly wins outright.
    """
    d = np.sort(np.asarray(values, dtype=float))[::-1]
    p = len(d)
    if p == 0:
        raise MnclustError("no values")
    if p == 1:
        return 1
    best_q, best_ll = 1, -np.inf
    for q in range(1, p + 1):
        g1, g2 = d[:q], d[q:]
        dof = p - 1 - (q < p)
        if dof <= 0:
            continue
        ss = ((g1 - g1.mean()) ** 2).sum() + (((g2 - g2.mean()) ** 2).sum() if len(g2) else 0.0)
        var = ss / dof
        if var <= 1e-24 * max(d[0] ** 2, 1e-300):
            return q
        ll = -0.5 * p * np.log(2 * np.pi * var) - 0.5 * ss / var
        if ll > best_ll:
            best_q, best_ll = q, ll
    return best_q


def kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = [points[rng.integers(n)]]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        idx = rng.integers(n) if total <= 0 else rng.choice(n, p=d2 / total)
        centers.append(points[idx])
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def lloyd(points: np.ndarray, centers: np.ndarray, max_iters: int = 300, trace: list | None = None):
    """Plain Lloyd iterations; empty clusters keep their previous center."""
    centers = centers.copy()
    labels = None
    for _ in range(max_iters):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(d2, axis=1)
        if trace is not None:
            trace.append(float(d2[np.arange(len(new)), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(centers.shape[0]):
            members = points[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
    inertia = float(((points - centers[labels]) ** 2).sum())
    return labels.astype(np.int64), centers, inertia


def kmeans(points: np.ndarray, k: int, restarts: int = 10, seed: int = 0):
    """Best-of-``restarts`` k-means with k-means++ seeding. Returns ``(labels, inertia)``."""
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        labels, _, inertia = lloyd(points, kmeans_pp_init(points, k, rng))
        if best is None or inertia < best[1] - 1e-12:
            best = (labels, inertia)
    return best


def elbow_kmeans(x, k_max: int | None = None, seed: int = 0, restarts: int = 10) -> BaselineResult:
    """Estimate the rank from the singular-value elbow, then k-means the projected columns."""
    a = _columns(x)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    limit = min(a.shape) if k_max is None else min(k_max, min(a.shape))
    if limit < 1:
        raise MnclustError("k_max must be >= 1")
    r = min(profile_likelihood_elbow(s), limit)
    if r == 1:
        return BaselineResult(np.zeros(a.shape[1], dtype=np.int64), 1)
    coords = (u[:, :r].T @ a).T
    labels, _ = kmeans(coords, r, restarts=restarts, seed=seed)
    return BaselineResult(labels, r)
