"""Pure-Python implementations of the hot loops.

These are the reference versions.  ``_ckernels.pyx`` mirrors them line for
line and must return identical results, including tie-breaking.
"""

from __future__ import annotations

import gc
from heapq import heappop, heappush

import numpy as np

N_CLASSES = 5


def dijkstra_topk(indptr, indices, costs, origin, eligible, k):
    """Settle nodes from ``origin`` until ``k`` eligible ones are settled.

    Settling continues through every node at the k-th eligible distance, so
    zero-cost edges cannot hide an equal-cost SP with a smaller id; callers
    sort by (dist, node) and truncate.  Heap entries are ``(dist, node)`` so
    equal distances settle the smaller node id first.  Relaxation uses strict
    ``<``, so the first predecessor found at the final distance is kept.

    Returns ``(nodes, dists, pred)`` where ``pred`` maps every reached node
    to its predecessor (-1 for the origin).
    """
    # the search allocates only acyclic tuples and dict entries; pausing the
    # cycle collector avoids repeated full passes over a large resident graph
    enabled = gc.isenabled()
    gc.disable()
    try:
        return _dijkstra_topk(indptr, indices, costs, origin, eligible, k)
    finally:
        if enabled:
            gc.enable()


def _dijkstra_topk(indptr, indices, costs, origin, eligible, k):
    found: list[int] = []
    dists: list[float] = []
    pred: dict[int, int] = {origin: -1}
    if k <= 0:
        return found, dists, pred
    dist = {origin: 0.0}
    settled: set[int] = set()
    heap = [(0.0, origin)]
    limit = None
    while heap:
        d, u = heappop(heap)
        if limit is not None and d > limit:
            break
        if u in settled:
            continue
        settled.add(u)
        if eligible[u]:
            found.append(u)
            dists.append(d)
            if limit is None and len(found) >= k:
                limit = d
        start, end = indptr[u], indptr[u + 1]
        for v, c in zip(indices[start:end].tolist(), costs[start:end].tolist()):
            if v in settled:
                continue
            nd = d + c
            old = dist.get(v)
            if old is None or nd < old:
                dist[v] = nd
                pred[v] = u
                heappush(heap, (nd, v))
    return found, dists, pred


def best_split(X, y, features):
    """Best Gini split of rows ``X`` (labels ``y`` in 0..4) over ``features``.

    Maximizes ``sum(cl**2)/nl + sum(cr**2)/nr``, which is equivalent to
    minimizing weighted Gini impurity.  Candidate thresholds sit at
    midpoints between consecutive distinct values; the first maximum in
    (feature order, ascending threshold) wins.

    Returns ``(feature, threshold, score)``; feature is -1 when no feature has
    two distinct values.
    """
    n = X.shape[0]
    best_f, best_t, best_s = -1, 0.0, -1.0
    if n < 2:
        return best_f, best_t, best_s
    onehot = np.zeros((n, N_CLASSES), dtype=np.float64)
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    for f in features:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        v = col[order]
        valid = v[1:] > v[:-1]
        if not valid.any():
            continue
        onehot[:] = 0.0
        onehot[np.arange(n), y[order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        cl = cum[:-1]
        cr = cum[-1] - cl
        score = (cl * cl).sum(axis=1) / nl + (cr * cr).sum(axis=1) / nr
        score[~valid] = -1.0
        i = int(np.argmax(score))
        if score[i] > best_s:
            lo, hi = float(v[i]), float(v[i + 1])
            t = (lo + hi) / 2.0
            if t <= lo:
                t = hi
            best_f, best_t, best_s = int(f), t, float(score[i])
    return best_f, best_t, best_s
