# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``; same signatures."""
import numpy as np

cimport numpy as cnp
from libc.math cimport log, pow, fabs, INFINITY

cnp.import_array()

DEF IMPROVE_RTOL = 1e-12


cdef inline double _xlogx(double v) nogil:
    return v * log(v) if v > 0 else 0.0


cdef double _value(double[:, ::1] m, Py_ssize_t k, double[::1] shift, double sign, double q) nogil:
    # profile contribution of column k of m (+ sign * shift when shift is non-empty)
    cdef Py_ssize_t i, d = m.shape[0]
    cdef bint use_shift = shift.shape[0] > 0
    cdef double v, s = 0.0, acc = 0.0, top = 0.0
    if q == 1.0:
        for i in range(d):
            v = m[i, k] + sign * shift[i] if use_shift else m[i, k]
            if v > 0:
                acc += v * log(v)
                s += v
        return acc - _xlogx(s)
    for i in range(d):
        v = m[i, k] + sign * shift[i] if use_shift else m[i, k]
        if v > top:
            top = v
    if top <= 0:
        return 0.0
    for i in range(d):
        v = m[i, k] + sign * shift[i] if use_shift else m[i, k]
        if v > 0:
            acc += pow(v / top, 1.0 / q)
    return top * pow(acc, q)


def cluster_values(m, double q):
    cdef double[:, ::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef Py_ssize_t k, K = mv.shape[1]
    cdef double[::1] empty = np.empty(0)
    out = np.empty(K)
    cdef double[::1] ov = out
    for k in range(K):
        ov[k] = _value(mv, k, empty, 0.0, q)
    return out


def refine_sweep(x, m, sizes, labels, order, double q):
    cdef double[:, ::1] xv = x
    cdef double[:, ::1] mv = m
    cdef cnp.int64_t[::1] sz = sizes
    cdef cnp.int64_t[::1] lab = labels
    cdef cnp.int64_t[::1] ordv = np.ascontiguousarray(order, dtype=np.int64)
    cdef Py_ssize_t d = mv.shape[0], K = mv.shape[1], T = ordv.shape[0]
    cdef Py_ssize_t n, t, a, b, best, i
    cdef double without, loss, g, bestgain, bestplus, p, scale
    cdef double[::1] xt = np.empty(d)
    cdef double[::1] vals = cluster_values(m, q)
    cdef int moves = 0
    if K == 1:
        return 0
    with nogil:
        for n in range(T):
            t = ordv[n]
            a = lab[t]
            if sz[a] <= 1:
                continue
            for i in range(d):
                xt[i] = xv[i, t]
            without = _value(mv, a, xt, -1.0, q)
            loss = vals[a] - without
            best = a
            bestgain = 0.0
            bestplus = 0.0
            for b in range(K):
                if b == a:
                    continue
                p = _value(mv, b, xt, 1.0, q)
                g = p - vals[b] - loss
                if best == a or g > bestgain:
                    best = b
                    bestgain = g
                    bestplus = p
            scale = fabs(vals[a]) + fabs(vals[best]) + 1.0
            if best != a and bestgain > IMPROVE_RTOL * scale:
                for i in range(d):
                    mv[i, a] -= xt[i]
                    mv[i, best] += xt[i]
                vals[a] = without
                vals[best] = bestplus
                sz[a] -= 1
                sz[best] += 1
                lab[t] = best
                moves += 1
    return moves


def pam_swap(dist, medoids):
    cdef double[:, ::1] dv = np.ascontiguousarray(dist, dtype=np.float64)
    cdef cnp.int64_t[::1] med = medoids
    cdef Py_ssize_t n = dv.shape[0], k = med.shape[0]
    cdef Py_ssize_t i, j, h, bj = -1, bh = -1
    cdef double current = 0.0, cost, base, v, best_cost
    nearest_a = np.full(n, INFINITY)
    second_a = np.full(n, INFINITY)
    owner_a = np.zeros(n, dtype=np.int64)
    ismed_a = np.zeros(n, dtype=np.uint8)
    cdef double[::1] nearest = nearest_a
    cdef double[::1] second = second_a
    cdef cnp.int64_t[::1] owner = owner_a
    cdef unsigned char[::1] ismed = ismed_a
    with nogil:
        for j in range(k):
            ismed[med[j]] = 1
        for i in range(n):
            for j in range(k):
                v = dv[i, med[j]]
                if v < nearest[i]:
                    second[i] = nearest[i]
                    nearest[i] = v
                    owner[i] = j
                elif v < second[i]:
                    second[i] = v
            current += nearest[i]
        best_cost = current
        for j in range(k):
            for h in range(n):
                if ismed[h]:
                    continue
                cost = 0.0
                for i in range(n):
                    base = second[i] if owner[i] == j else nearest[i]
                    cost += dv[i, h] if dv[i, h] < base else base
                if cost < best_cost - 1e-12 * (current if current > 1.0 else 1.0):
                    best_cost = cost
                    bj = j
                    bh = h
    if bj < 0:
        return False
    med[bj] = bh
    return True
