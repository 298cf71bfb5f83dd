# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: batched BFS, pool-adjacent-violators, FPS update.

Every function here has a drop-in twin in :mod:`spdbridge._fallback`; the
two are checked against each other in the test suite.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def bfs_multi(const cnp.int64_t[::1] indptr, const cnp.int32_t[::1] indices,
              const cnp.int64_t[::1] sources):
    """Hop distances from each source, shape ``(n, len(sources))``, -1 if unreachable."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t k = sources.shape[0]
    out_t = np.full((k, n), -1, dtype=np.int32)
    cdef cnp.int32_t[:, ::1] dist = out_t
    cdef cnp.int32_t[::1] queue = np.empty(max(n, 1), dtype=np.int32)
    cdef Py_ssize_t s, head, tail, e, src
    cdef cnp.int32_t u, w, du
    for s in range(k):
        src = sources[s]
        if src < 0 or src >= n:
            raise IndexError(f"source {src} out of range for n={n}")
        dist[s, src] = 0
        queue[0] = <cnp.int32_t>src
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[s, u] + 1
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if dist[s, w] < 0:
                    dist[s, w] = du
                    queue[tail] = w
                    tail += 1
    return np.ascontiguousarray(out_t.T)


def pava(const double[::1] y, const double[::1] w):
    """Weighted L2 isotonic (nondecreasing) fit of ``y`` in the given order."""
    cdef Py_ssize_t n = y.shape[0]
    cdef double[::1] val = np.empty(n, dtype=np.float64)
    cdef double[::1] wt = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t[::1] cnt = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t i, j, top = -1, pos = 0
    cdef double ww
    for i in range(n):
        top += 1
        val[top] = y[i]
        wt[top] = w[i]
        cnt[top] = 1
        while top > 0 and val[top - 1] > val[top]:
            ww = wt[top - 1] + wt[top]
            val[top - 1] = (wt[top - 1] * val[top - 1] + wt[top] * val[top]) / ww
            wt[top - 1] = ww
            cnt[top - 1] += cnt[top]
            top -= 1
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(top + 1):
        for j in range(cnt[i]):
            o[pos] = val[i]
            pos += 1
    return out


def min_update_argmax(cnp.int64_t[::1] mindist, const cnp.int32_t[::1] dist):
    """In place ``mindist = min(mindist, dist)``; return the first argmax afterwards.

    Unreachable entries (``dist < 0``) leave ``mindist`` untouched.
    """
    cdef Py_ssize_t i, best = 0, n = mindist.shape[0]
    cdef cnp.int64_t bestval = -1
    for i in range(n):
        if dist[i] >= 0 and dist[i] < mindist[i]:
            mindist[i] = dist[i]
        if mindist[i] > bestval:
            bestval = mindist[i]
            best = i
    return best
