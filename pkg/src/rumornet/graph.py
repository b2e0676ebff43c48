"""Directed, weighted information graph shared by every downstream analysis."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import InvalidEdgeError, MissingNodeError


class Role(str, enum.Enum):
    SEED = "Seed"
    SPREADER = "Spreader"
    INFECTED = "Infected"
    ORDINARY = "Ordinary"


@dataclass
class UserNode:
    id: str
    follower_count: int = 0
    role: Role = Role.ORDINARY
    state: Optional[str] = None
    geo_confidence: Optional[float] = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("user id must be non-empty")
        if self.follower_count < 0:
            raise ValueError(f"negative follower_count for {self.id!r}")
        self.role = Role(self.role)
        if (self.state is None) != (self.geo_confidence is None):
            raise ValueError(f"state and geo_confidence must be set together for {self.id!r}")
        if self.geo_confidence is not None and not 0.0 <= self.geo_confidence <= 1.0:
            raise ValueError(f"geo_confidence out of [0,1] for {self.id!r}")


@dataclass(frozen=True)
class WeightedEdge:
    source: str
    target: str
    weight: int


class CSRGraph:
    """Array view of the graph indexed by target: in-edges of node ``i`` are
    ``src[indptr[i]:indptr[i+1]]`` with weights ``weight[...]``."""

    __slots__ = ("ids", "index", "indptr", "src", "dst", "weight")

    def __init__(self, ids, indptr, src, dst, weight):
        self.ids = ids
        self.index = {u: i for i, u in enumerate(ids)}
        self.indptr = indptr
        self.src = src
        self.dst = dst
        self.weight = weight

    @property
    def n(self):
        return len(self.ids)


class InformationGraph:
    """G = (V, E). Edge ``(v -> u)`` is an impression channel from v to u.

    Construction mutates in place; the mutators return the graph so calls can
    be chained. Once built, treat the graph as read-only.
    """

    def __init__(self):
        self._nodes: dict[str, UserNode] = {}
        self._in: dict[str, dict[str, int]] = {}
        self._out: dict[str, dict[str, int]] = {}
        self._csr: Optional[CSRGraph] = None

    # construction

    def add_user(self, node: UserNode) -> "InformationGraph":
        existing = self._nodes.get(node.id)
        if existing is None:
            self._nodes[node.id] = node
            self._in[node.id] = {}
            self._out[node.id] = {}
            self._csr = None
        else:
            existing.follower_count = node.follower_count
            existing.role = node.role
            if node.state is not None:
                existing.state = node.state
                existing.geo_confidence = node.geo_confidence
        return self

    def add_edge(self, source: str, target: str, weight: int = 1) -> "InformationGraph":
        if source not in self._nodes:
            raise MissingNodeError(f"unknown node {source!r}")
        if target not in self._nodes:
            raise MissingNodeError(f"unknown node {target!r}")
        if source == target:
            raise InvalidEdgeError(f"self-loop on {source!r}")
        if int(weight) != weight or weight < 1:
            raise InvalidEdgeError(f"edge weight must be a positive integer, got {weight!r}")
        w = self._out[source].get(target, 0) + int(weight)
        self._out[source][target] = w
        self._in[target][source] = w
        self._csr = None
        return self

    # queries

    def __contains__(self, user_id) -> bool:
        return user_id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, user_id: str) -> UserNode:
        try:
            return self._nodes[user_id]
        except KeyError:
            raise MissingNodeError(f"unknown node {user_id!r}") from None

    def nodes(self) -> list[UserNode]:
        return [self._nodes[k] for k in sorted(self._nodes)]

    def user_ids(self) -> list[str]:
        return sorted(self._nodes)

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(d) for d in self._out.values())

    def edges(self) -> list[WeightedEdge]:
        return [
            WeightedEdge(s, t, w)
            for s in sorted(self._out)
            for t, w in sorted(self._out[s].items())
        ]

    def weight(self, source: str, target: str) -> int:
        """Weight of ``source -> target``; 0 when the edge is absent."""
        return self._out.get(source, {}).get(target, 0)

    def in_neighbors(self, u: str) -> list[tuple[str, int]]:
        if u not in self._nodes:
            raise MissingNodeError(f"unknown node {u!r}")
        return sorted(self._in[u].items())

    def out_neighbors(self, u: str) -> list[tuple[str, int]]:
        if u not in self._nodes:
            raise MissingNodeError(f"unknown node {u!r}")
        return sorted(self._out[u].items())

    def in_degree(self, u: str) -> int:
        return len(self._in[u])

    def out_degree(self, u: str) -> int:
        return len(self._out[u])

    def set_role(self, u: str, role: Role) -> None:
        self.node(u).role = Role(role)

    def to_csr(self) -> CSRGraph:
        """Cached array form used by the simulation kernels."""
        if self._csr is None:
            ids = sorted(self._nodes)
            index = {u: i for i, u in enumerate(ids)}
            counts = np.fromiter((len(self._in[u]) for u in ids), dtype=np.int64, count=len(ids))
            indptr = np.zeros(len(ids) + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            m = int(indptr[-1])
            src = np.empty(m, dtype=np.int64)
            dst = np.empty(m, dtype=np.int64)
            weight = np.empty(m, dtype=np.int64)
            pos = 0
            for i, u in enumerate(ids):
                for v, w in sorted(self._in[u].items()):
                    src[pos] = index[v]
                    dst[pos] = i
                    weight[pos] = w
                    pos += 1
            self._csr = CSRGraph(ids, indptr, src, dst, weight)
        return self._csr


def graph_from_edges(edges: Iterable[tuple], users: Iterable[UserNode] = (), default_followers: int = 0) -> InformationGraph:
    """Small convenience builder: nodes are created on demand for edge endpoints."""
    g = InformationGraph()
    for node in users:
        g.add_user(node)
    for edge in edges:
        s, t = edge[0], edge[1]
        w = edge[2] if len(edge) > 2 else 1
        for u in (s, t):
            if u not in g:
                g.add_user(UserNode(u, default_followers))
        g.add_edge(s, t, w)
    return g
