"""Hierarchical re-ranking of T-kNGK candidates.

Each candidate is classified into a rank 1..5 by the forest, then given an
adjusted score ``alpha * avg_stars``.  The final order is rank descending,
adjusted score descending, path cost ascending, SP id ascending.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .alpha import AlphaParams, CountStats, alpha, count_stats, score_c
from .errors import EmptyModel
from .forest import RandomForestModel, extract_features, predict
from .graph import GeosocialGraph
from .query import Candidate, Query


class AlphaScope(str, enum.Enum):
    CANDIDATES = "candidates"
    GLOBAL = "global"


@dataclass(frozen=True)
class Recommendation:
    sp: int
    rank: int
    score_c: float
    path_cost: float
    path: tuple[int, ...]
    alpha: float


def sort_key(r: Recommendation) -> tuple:
    return (-r.rank, -r.score_c, r.path_cost, r.sp)


def scope_stats(graph: GeosocialGraph, candidates: Sequence[Candidate],
                scope: AlphaScope | str) -> CountStats:
    scope = AlphaScope(scope)
    if scope is AlphaScope.CANDIDATES:
        counts = [graph.sp_stats(c.sp).count for c in candidates]
    else:
        counts = [graph.sp_stats(sp.id).count for sp in graph.sps]
    return count_stats(counts)


def optimize(
    graph: GeosocialGraph,
    q: Query,
    candidates: Sequence[Candidate],
    model: RandomForestModel,
    params: AlphaParams = AlphaParams(),
    scope: AlphaScope | str = AlphaScope.CANDIDATES,
) -> list[Recommendation]:
    if not model.trees:
        raise EmptyModel("model has no trees")
    if not candidates:
        return []
    stats = scope_stats(graph, candidates, scope)
    out = []
    for c in candidates:
        sp = graph.service_provider(c.sp)
        st = graph.sp_stats(c.sp)
        rank = predict(model, extract_features(q.keywords, sp, st))
        a = alpha(st.count, stats, params)
        # unreviewed SPs have no rating; they score 0 and sort last in their rank
        sc = score_c(a, st.avg_stars) if st.avg_stars is not None else 0.0
        out.append(Recommendation(c.sp, rank, sc, c.cost, c.path, a))
    out.sort(key=sort_key)
    return out
