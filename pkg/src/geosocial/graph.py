"""In-memory geosocial network: users, service providers, weighted edges.

Node ids are dense integers shared by users and service providers (SPs) and
assigned in insertion order.  Edges are undirected, stored once and visible
from both endpoints.  After construction the graph is treated as read-only;
:meth:`GeosocialGraph.compiled` returns a cached CSR view used by the query
kernels.
"""

from __future__ import annotations

import enum
import itertools
import json
import os
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    CorruptSnapshot,
    DuplicateNode,
    InvalidCoordinate,
    KindMismatch,
    NotAServiceProvider,
    SelfLoop,
    UnknownNode,
    UnsupportedSnapshotVersion,
    WeightOutOfRange,
)

SNAPSHOT_VERSION = "1"


@dataclass(frozen=True, slots=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self) -> None:
        check_coordinates(self.lat, self.lon)


def check_coordinates(lat: float, lon: float) -> None:
    try:
        ok = -90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0
    except TypeError:
        ok = False
    if not ok:
        raise InvalidCoordinate(f"coordinate out of range: lat={lat!r}, lon={lon!r}")


class EdgeKind(str, enum.Enum):
    FRIENDSHIP = "friendship"
    REVIEW = "review"


@dataclass(frozen=True, slots=True)
class UserNode:
    id: int
    external_id: str


@dataclass(frozen=True, slots=True)
class ServiceProviderNode:
    id: int
    external_id: str
    name: str
    keywords: frozenset[str]
    location: GeoPoint


@dataclass(frozen=True, slots=True)
class Edge:
    a: int
    b: int
    weight: float
    kind: EdgeKind
    stars: int | None = None

    def other(self, n: int) -> int:
        return self.b if n == self.a else self.a


@dataclass(frozen=True, slots=True)
class SpStats:
    """Review statistics of one SP.  ``avg_stars`` is None when count is 0."""

    count: int = 0
    avg_stars: float | None = None


@dataclass(frozen=True)
class CompiledGraph:
    """CSR adjacency with edge costs ``1 - weight``, neighbors ascending."""

    indptr: np.ndarray
    indices: np.ndarray
    costs: np.ndarray
    is_sp: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1


class GeosocialGraph:
    """Undirected weighted graph of users and service providers."""

    def __init__(self) -> None:
        self._nodes: list[UserNode | ServiceProviderNode] = []
        self._user_ids: dict[str, int] = {}
        self._sp_ids: dict[str, int] = {}
        self._adj: list[dict[int, Edge]] = []
        self._edges: dict[tuple[int, int], Edge] = {}
        self._stats: dict[int, SpStats] = {}
        self.keyword_index: dict[str, set[int]] = {}
        self._compiled: CompiledGraph | None = None

    # construction ---------------------------------------------------------

    def add_user(self, external_id: str) -> int:
        if external_id in self._user_ids:
            raise DuplicateNode(f"user {external_id!r} already present")
        nid = len(self._nodes)
        self._nodes.append(UserNode(nid, external_id))
        self._adj.append({})
        self._user_ids[external_id] = nid
        self._compiled = None
        return nid

    def add_service_provider(
        self,
        external_id: str,
        name: str,
        keywords: Iterable[str],
        location: GeoPoint | tuple[float, float],
    ) -> int:
        if external_id in self._sp_ids:
            raise DuplicateNode(f"service provider {external_id!r} already present")
        if not isinstance(location, GeoPoint):
            location = GeoPoint(*location)
        nid = len(self._nodes)
        kw = frozenset(keywords)
        self._nodes.append(ServiceProviderNode(nid, external_id, name, kw, location))
        self._adj.append({})
        self._sp_ids[external_id] = nid
        self._stats[nid] = SpStats()
        for token in kw:
            self.keyword_index.setdefault(token, set()).add(nid)
        self._compiled = None
        return nid

    def connect(
        self,
        a: int,
        b: int,
        weight: float,
        kind: EdgeKind | str,
        stars: int | None = None,
    ) -> Edge:
        """Add or replace the undirected edge between ``a`` and ``b``."""
        kind = EdgeKind(kind)
        if a == b:
            raise SelfLoop(f"self-loop on node {a}")
        na, nb = self.node(a), self.node(b)
        if not 0.0 <= weight <= 1.0:
            raise WeightOutOfRange(f"edge weight {weight!r} not in [0, 1]")
        a_user, b_user = isinstance(na, UserNode), isinstance(nb, UserNode)
        if kind is EdgeKind.FRIENDSHIP:
            if not (a_user and b_user):
                raise KindMismatch("friendship edges connect two users")
            if stars is not None:
                raise KindMismatch("friendship edges carry no stars")
        else:
            if a_user == b_user:
                raise KindMismatch("review edges connect one user and one SP")
            if stars is None or not 1 <= stars <= 5:
                raise KindMismatch(f"review edges need stars in 1..5, got {stars!r}")
        lo, hi = (a, b) if a < b else (b, a)
        edge = Edge(lo, hi, float(weight), kind, stars)
        self._edges[(lo, hi)] = edge
        self._adj[lo][hi] = edge
        self._adj[hi][lo] = edge
        self._compiled = None
        return edge

    def set_sp_stats(self, sp: int, count: int, avg_stars: float | None) -> SpStats:
        self._require_sp(sp)
        if count < 0:
            raise ValueError("review count must be non-negative")
        if count == 0:
            avg_stars = None
        elif avg_stars is None or not 1.0 <= avg_stars <= 5.0:
            raise ValueError(f"avg_stars {avg_stars!r} not in [1, 5]")
        stats = SpStats(count, avg_stars)
        self._stats[sp] = stats
        return stats

    # lookup ---------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def node(self, n: int) -> UserNode | ServiceProviderNode:
        if not isinstance(n, (int, np.integer)) or not 0 <= n < len(self._nodes):
            raise UnknownNode(f"no node with id {n!r}")
        return self._nodes[n]

    def is_user(self, n: int) -> bool:
        return isinstance(self.node(n), UserNode)

    def _require_sp(self, n: int) -> ServiceProviderNode:
        node = self.node(n)
        if not isinstance(node, ServiceProviderNode):
            raise NotAServiceProvider(f"node {n} is a user")
        return node

    def service_provider(self, n: int) -> ServiceProviderNode:
        return self._require_sp(n)

    def user_id(self, external_id: str) -> int:
        try:
            return self._user_ids[external_id]
        except KeyError:
            raise UnknownNode(f"no user {external_id!r}") from None

    def sp_id(self, external_id: str) -> int:
        try:
            return self._sp_ids[external_id]
        except KeyError:
            raise UnknownNode(f"no service provider {external_id!r}") from None

    @property
    def users(self) -> list[UserNode]:
        return [n for n in self._nodes if isinstance(n, UserNode)]

    @property
    def sps(self) -> list[ServiceProviderNode]:
        return [n for n in self._nodes if isinstance(n, ServiceProviderNode)]

    def neighbors(self, n: int) -> list[tuple[int, Edge]]:
        self.node(n)
        return sorted(self._adj[n].items())

    def edge(self, a: int, b: int) -> Edge | None:
        lo, hi = (a, b) if a < b else (b, a)
        return self._edges.get((lo, hi))

    def edges(self) -> Iterator[Edge]:
        """All edges ordered by (a, b) with a < b."""
        for key in sorted(self._edges):
            yield self._edges[key]

    def sp_stats(self, sp: int) -> SpStats:
        self._require_sp(sp)
        return self._stats[sp]

    def sp_ids_for(self, keywords: Iterable[str]) -> set[int]:
        out: set[int] = set()
        for token in keywords:
            out |= self.keyword_index.get(token, set())
        return out

    # invariants -----------------------------------------------------------

    def audit(self) -> None:
        """Check every structural invariant; raise CorruptSnapshot on failure."""
        n = len(self._nodes)
        for i, node in enumerate(self._nodes):
            if node.id != i:
                raise CorruptSnapshot(f"node at position {i} has id {node.id}")
        if len(self._adj) != n:
            raise CorruptSnapshot("adjacency length differs from node count")
        for (lo, hi), e in self._edges.items():
            if not (0 <= lo < hi < n) or (e.a, e.b) != (lo, hi):
                raise CorruptSnapshot(f"bad edge key {(lo, hi)}")
            if not 0.0 <= e.weight <= 1.0:
                raise CorruptSnapshot(f"edge {(lo, hi)} weight {e.weight} not in [0, 1]")
            if self._adj[lo].get(hi) is not e or self._adj[hi].get(lo) is not e:
                raise CorruptSnapshot(f"edge {(lo, hi)} not symmetric in adjacency")
            lo_user = isinstance(self._nodes[lo], UserNode)
            hi_user = isinstance(self._nodes[hi], UserNode)
            if e.kind is EdgeKind.FRIENDSHIP:
                if not (lo_user and hi_user) or e.stars is not None:
                    raise CorruptSnapshot(f"friendship edge {(lo, hi)} malformed")
            elif lo_user == hi_user or e.stars is None or not 1 <= e.stars <= 5:
                raise CorruptSnapshot(f"review edge {(lo, hi)} malformed")
        if sum(len(a) for a in self._adj) != 2 * len(self._edges):
            raise CorruptSnapshot("adjacency holds edges missing from the edge table")
        rebuilt: dict[str, set[int]] = {}
        for node in self._nodes:
            if isinstance(node, ServiceProviderNode):
                for token in node.keywords:
                    rebuilt.setdefault(token, set()).add(node.id)
        if rebuilt != self.keyword_index:
            raise CorruptSnapshot("keyword index inconsistent with SP keywords")
        sp_ids = {node.id for node in self._nodes if isinstance(node, ServiceProviderNode)}
        if set(self._stats) != sp_ids:
            raise CorruptSnapshot("stats keys differ from SP ids")
        for sp, st in self._stats.items():
            if st.count < 0 or (st.count == 0) != (st.avg_stars is None):
                raise CorruptSnapshot(f"stats for SP {sp} malformed")
            if st.avg_stars is not None and not 1.0 <= st.avg_stars <= 5.0:
                raise CorruptSnapshot(f"stats for SP {sp} avg_stars out of range")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GeosocialGraph):
            return NotImplemented
        return (
            self._nodes == other._nodes
            and self._edges == other._edges
            and self._stats == other._stats
            and self.keyword_index == other.keyword_index
        )

    __hash__ = None  # type: ignore[assignment]

    # compiled view --------------------------------------------------------

    def compiled(self) -> CompiledGraph:
        if self._compiled is None:
            self._compiled = _compile(self)
        return self._compiled

    # persistence ----------------------------------------------------------

    def to_dict(self) -> dict:
        users, sps = [], []
        for node in self._nodes:
            if isinstance(node, UserNode):
                users.append({"id": node.id, "external_id": node.external_id})
            else:
                sps.append(
                    {
                        "id": node.id,
                        "external_id": node.external_id,
                        "name": node.name,
                        "keywords": sorted(node.keywords),
                        "location": [node.location.lat, node.location.lon],
                    }
                )
        edges = [
            {"a": e.a, "b": e.b, "weight": e.weight, "kind": e.kind.value, "stars": e.stars}
            for e in self.edges()
        ]
        stats = {
            str(sp): {"count": st.count, "avg_stars": st.avg_stars}
            for sp, st in sorted(self._stats.items())
        }
        return {"version": SNAPSHOT_VERSION, "users": users, "sps": sps, "edges": edges, "stats": stats}

    @classmethod
    def from_dict(cls, doc: dict) -> "GeosocialGraph":
        if not isinstance(doc, dict):
            raise CorruptSnapshot("snapshot root must be an object")
        version = doc.get("version")
        if version != SNAPSHOT_VERSION:
            raise UnsupportedSnapshotVersion(f"snapshot version {version!r} not supported")
        g = cls()
        try:
            nodes = [(u["id"], "user", u) for u in doc["users"]]
            nodes += [(s["id"], "sp", s) for s in doc["sps"]]
            nodes.sort(key=lambda t: t[0])
            for expected, (nid, tag, rec) in enumerate(nodes):
                if nid != expected:
                    raise CorruptSnapshot(f"node ids not dense: expected {expected}, got {nid}")
                if tag == "user":
                    g.add_user(rec["external_id"])
                else:
                    g.add_service_provider(
                        rec["external_id"], rec["name"], rec["keywords"], GeoPoint(*rec["location"])
                    )
            for e in doc["edges"]:
                g.connect(e["a"], e["b"], e["weight"], e["kind"], e.get("stars"))
            if sorted(int(k) for k in doc["stats"]) != sorted(s["id"] for s in doc["sps"]):
                raise CorruptSnapshot("stats keys differ from SP ids")
            for key, st in doc["stats"].items():
                g.set_sp_stats(int(key), st["count"], st["avg_stars"])
        except CorruptSnapshot:
            raise
        except (KeyError, TypeError, ValueError, LookupError) as exc:
            raise CorruptSnapshot(f"malformed snapshot: {exc}") from exc
        g.audit()
        return g

    def save_snapshot(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps_snapshot(self))

    @classmethod
    def load_snapshot(cls, path: str | os.PathLike) -> "GeosocialGraph":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CorruptSnapshot(f"snapshot is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def dumps_snapshot(graph: GeosocialGraph) -> str:
    return json.dumps(graph.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def save_snapshot(graph: GeosocialGraph, path: str | os.PathLike) -> None:
    graph.save_snapshot(path)


def load_snapshot(path: str | os.PathLike) -> GeosocialGraph:
    return GeosocialGraph.load_snapshot(path)


def _compile(g: GeosocialGraph) -> CompiledGraph:
    n = len(g._nodes)
    m = len(g._edges)
    # edge keys are the (lo, hi) endpoint pairs
    ab = np.fromiter(itertools.chain.from_iterable(g._edges), dtype=np.int64, count=2 * m).reshape(m, 2)
    a, b = ab[:, 0], ab[:, 1]
    w = np.fromiter((e.weight for e in g._edges.values()), dtype=np.float64, count=m)
    src = np.concatenate([a, b])
    dst = np.concatenate([b, a])
    cost = np.concatenate([1.0 - w, 1.0 - w])
    # (src, dst) pairs are unique, so one sort on a combined key orders rows and neighbors
    order = np.argsort(src * n + dst)
    indices = np.ascontiguousarray(dst[order])
    costs = np.ascontiguousarray(cost[order])
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    is_sp = np.fromiter(
        (isinstance(node, ServiceProviderNode) for node in g._nodes), dtype=np.bool_, count=n
    )
    return CompiledGraph(indptr, indices, costs, is_sp)
