"""Top-k nearest geosocial keyword (T-kNGK) queries.

Edge weights in [0, 1] become path lengths via ``cost = 1 - weight`` and a
Dijkstra search from the querying user settles nodes in (cost, id) order,
emitting each SP that matches a query keyword and lies inside the query
disk, until ``k`` have been found.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .errors import EmptyKeywords, OriginNotUser, WeightOutOfRange
from .graph import GeoPoint, GeosocialGraph, ServiceProviderNode, check_coordinates

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class Query:
    origin: int
    keywords: frozenset[str]
    center: GeoPoint
    radius_m: float
    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "keywords", frozenset(self.keywords))
        if not isinstance(self.center, GeoPoint):
            object.__setattr__(self, "center", GeoPoint(*self.center))
        if not self.keywords:
            raise EmptyKeywords("query keyword set is empty")
        if not self.radius_m >= 0:
            raise ValueError(f"radius_m must be >= 0, got {self.radius_m!r}")
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k!r}")


@dataclass(frozen=True)
class Candidate:
    sp: int
    cost: float
    path: tuple[int, ...] = field(default=())


def edge_cost(weight: float) -> float:
    if not 0.0 <= weight <= 1.0:
        raise WeightOutOfRange(f"edge weight {weight!r} not in [0, 1]")
    return 1.0 - weight


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a sphere of radius 6,371 km."""
    check_coordinates(a.lat, a.lon)
    check_coordinates(b.lat, b.lon)
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlmb = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def is_eligible(sp: ServiceProviderNode, q: Query) -> bool:
    if q.keywords.isdisjoint(sp.keywords):
        return False
    return haversine_m(sp.location, q.center) <= q.radius_m


def eligible_sps(graph: GeosocialGraph, q: Query) -> list[int]:
    """Ids of every SP satisfying the keyword and spatial filters, ascending."""
    out = []
    for sp in sorted(graph.sp_ids_for(q.keywords)):
        if is_eligible(graph.service_provider(sp), q):
            out.append(sp)
    return out


def _validate(graph: GeosocialGraph, q: Query) -> None:
    node = graph.node(q.origin)
    if isinstance(node, ServiceProviderNode):
        raise OriginNotUser(f"query origin {q.origin} is a service provider")


def tkngk(graph: GeosocialGraph, q: Query, kernels=None) -> list[Candidate]:
    """Answer a T-kNGK query; results are sorted by (cost, sp id).

    ``kernels`` selects a kernel module explicitly (the compiled or the
    pure-Python backend); by default the fastest available one is used.
    """
    _validate(graph, q)
    if q.k == 0:
        return []
    kernels = kernels or _kernels.backend
    cg = graph.compiled()
    eligible = np.zeros(cg.n_nodes, dtype=np.uint8)
    targets = eligible_sps(graph, q)
    if not targets:
        return []
    eligible[targets] = 1
    found, dists, pred = kernels.dijkstra_topk(
        cg.indptr, cg.indices, cg.costs, q.origin, eligible, q.k
    )
    out = []
    for d, sp in sorted(zip(dists, found))[: q.k]:
        path = [sp]
        node = sp
        while node != q.origin:
            node = int(pred[node])
            path.append(node)
        path.reverse()
        out.append(Candidate(int(sp), float(d), tuple(path)))
    return out


def path_cost(graph: GeosocialGraph, path: Iterable[int]) -> float:
    """Sum of edge costs along ``path``, accumulated in path order."""
    nodes = list(path)
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        e = graph.edge(a, b)
        if e is None:
            raise ValueError(f"no edge between {a} and {b}")
        total += edge_cost(e.weight)
    return total
