# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the loops in ``_pykernels``; results must match exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY

cnp.import_array()

DEF N_CLASSES = 5


cdef struct HeapItem:
    double d
    Py_ssize_t node


cdef inline bint _less(HeapItem a, HeapItem b) noexcept nogil:
    return a.d < b.d or (a.d == b.d and a.node < b.node)


cdef inline void _push(HeapItem* heap, Py_ssize_t* size, HeapItem item) noexcept nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(item, heap[parent]):
            heap[i] = heap[parent]
            i = parent
        else:
            break
    heap[i] = item


cdef inline HeapItem _pop(HeapItem* heap, Py_ssize_t* size) noexcept nogil:
    cdef HeapItem top = heap[0]
    cdef HeapItem last
    cdef Py_ssize_t i = 0, child, n
    size[0] -= 1
    n = size[0]
    if n > 0:
        last = heap[n]
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and _less(heap[child + 1], heap[child]):
                child += 1
            if _less(heap[child], last):
                heap[i] = heap[child]
                i = child
            else:
                break
        heap[i] = last
    return top


def dijkstra_topk(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                  const double[::1] costs, Py_ssize_t origin,
                  const cnp.uint8_t[::1] eligible, Py_ssize_t k):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    pred_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] pred = pred_arr
    found = []
    dists = []
    if k <= 0:
        return found, dists, pred_arr
    dist_arr = np.full(n, np.inf, dtype=np.float64)
    settled_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] dist = dist_arr
    cdef cnp.uint8_t[::1] settled = settled_arr
    # lazy-deletion heap: at most one push per edge relaxation plus the origin
    cdef Py_ssize_t cap = indices.shape[0] + 1
    cdef HeapItem* heap = <HeapItem*> malloc(cap * sizeof(HeapItem))
    if heap == NULL:
        raise MemoryError()
    cdef Py_ssize_t size = 0, n_found = 0, u, v, j
    cdef double d, nd, limit = INFINITY
    cdef HeapItem item
    try:
        dist[origin] = 0.0
        item.d = 0.0
        item.node = origin
        _push(heap, &size, item)
        while size > 0:
            item = _pop(heap, &size)
            d = item.d
            u = item.node
            if d > limit:
                break
            if settled[u]:
                continue
            settled[u] = 1
            if eligible[u]:
                found.append(u)
                dists.append(d)
                n_found += 1
                if n_found == k:
                    limit = d
            for j in range(indptr[u], indptr[u + 1]):
                v = indices[j]
                if settled[v]:
                    continue
                nd = d + costs[j]
                if nd < dist[v]:
                    dist[v] = nd
                    pred[v] = u
                    item.d = nd
                    item.node = v
                    _push(heap, &size, item)
    finally:
        free(heap)
    return found, dists, pred_arr


def best_split(const double[:, ::1] X, const cnp.int64_t[::1] y, features):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t i, c, f
    cdef double total[N_CLASSES]
    cdef double left[N_CLASSES]
    cdef double sl, sr, r, score, lo, hi, t
    cdef double best_s = -1.0, best_t = 0.0
    cdef Py_ssize_t best_f = -1
    cdef Py_ssize_t row, f_best_i
    cdef double f_best_s
    cdef cnp.int64_t[::1] order
    if n < 2:
        return best_f, best_t, best_s
    for c in range(N_CLASSES):
        total[c] = 0.0
    for i in range(n):
        total[y[i]] += 1.0
    Xa = np.asarray(X)
    for f in features:
        order = np.argsort(Xa[:, f], kind="stable").astype(np.int64)
        for c in range(N_CLASSES):
            left[c] = 0.0
        f_best_s = -1.0
        f_best_i = -1
        for i in range(n - 1):
            row = order[i]
            left[y[row]] += 1.0
            lo = X[row, f]
            hi = X[order[i + 1], f]
            if not hi > lo:
                continue
            sl = 0.0
            sr = 0.0
            for c in range(N_CLASSES):
                sl += left[c] * left[c]
                r = total[c] - left[c]
                sr += r * r
            score = sl / (i + 1) + sr / (n - i - 1)
            if score > f_best_s:
                f_best_s = score
                f_best_i = i
        if f_best_i >= 0 and f_best_s > best_s:
            lo = X[order[f_best_i], f]
            hi = X[order[f_best_i + 1], f]
            t = (lo + hi) / 2.0
            if t <= lo:
                t = hi
            best_f = f
            best_t = t
            best_s = f_best_s
    return best_f, best_t, best_s
