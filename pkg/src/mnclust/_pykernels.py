"""Pure-Python/numpy versions of the hot loops.

Signatures and in-place semantics match ``_ckernels.pyx`` exactly; the
package picks one of the two at import time (see ``_accel``).
"""
from __future__ import annotations

import numpy as np

# Relative margin a move must clear to count as a strict improvement; keeps
# round-off from producing endless swaps between equivalent labelings.
IMPROVE_RTOL = 1e-12


def _xlogx(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log(v[pos])
    return out


def cluster_values(m: np.ndarray, q: float) -> np.ndarray:
    """Per-column contribution of a d x K count matrix to the profile objective."""
    m = np.asarray(m, dtype=float)
    if q == 1.0:
        s = m.sum(axis=0)
        return _xlogx(m).sum(axis=0) - _xlogx(s)
    top = m.max(axis=0)
    out = np.zeros(m.shape[1])
    nz = top > 0
    r = m[:, nz] / top[nz]
    out[nz] = top[nz] * np.sum(r ** (1.0 / q), axis=0) ** q
    return out


def refine_sweep(x, m, sizes, labels, order, q) -> int:
    """One greedy pass over ``order``; moves each column to its best cluster.

    ``x`` is d x T (float64), ``m`` the d x K pooled counts, ``sizes`` the
    cluster sizes and ``labels`` the current assignment; all but ``x`` and
    ``order`` are updated in place. A move that would empty a cluster is never
    made. Returns the number of moves.
    """
    K = m.shape[1]
    vals = cluster_values(m, q)
    moves = 0
    for t in order:
        a = labels[t]
        if sizes[a] <= 1 or K == 1:
            continue
        xt = x[:, t]
        without = cluster_values(m[:, a : a + 1] - xt[:, None], q)[0]
        loss = vals[a] - without
        plus = cluster_values(m + xt[:, None], q)
        gain = plus - vals - loss
        gain[a] = 0.0
        b = int(np.argmax(gain))
        scale = abs(vals[a]) + abs(vals[b]) + 1.0
        if b != a and gain[b] > IMPROVE_RTOL * scale:
            m[:, a] -= xt
            m[:, b] += xt
            vals[a] = without
            vals[b] = plus[b]
            sizes[a] -= 1
            sizes[b] += 1
            labels[t] = b
            moves += 1
    return moves


def pam_swap(dist, medoids) -> bool:
    """Apply the best improving (medoid, non-medoid) swap; return whether one was made.

    ``medoids`` is an int64 array updated in place.
    """
    n = dist.shape[0]
    k = len(medoids)
    dm = dist[:, medoids]
    current = dm.min(axis=1).sum()
    if k > 1:
        part = np.partition(dm, 1, axis=1)
        nearest, second = part[:, 0], part[:, 1]
    else:
        nearest = dm[:, 0]
        second = np.full(n, np.inf)
    owner = np.argmin(dm, axis=1)
    is_med = np.zeros(n, dtype=bool)
    is_med[medoids] = True
    best_cost, best = current, None
    for j in range(k):
        mine = owner == j
        base = np.where(mine, second, nearest)
        for h in np.flatnonzero(~is_med):
            cost = np.minimum(base, dist[:, h]).sum()
            if cost < best_cost - 1e-12 * max(current, 1.0):
                best_cost, best = cost, (j, h)
    if best is None:
        return False
    medoids[best[0]] = best[1]
    return True
