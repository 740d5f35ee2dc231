import math
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Union

import networkx as nx

from qirw.core.exceptions import InputError

Vertex = int
Edge = tuple[int, int]
# Distances are exact ints; math.inf is the only float that ever appears.
Distance = Union[int, float]
INFINITE = math.inf


def edge_key(u: Vertex, v: Vertex) -> Edge:
    """Canonical (min, max) form of an undirected edge."""
    if u == v:
        raise InputError(f"loop at vertex {u}", data={"vertex": u})
    return (u, v) if u < v else (v, u)


def is_finite(d: Distance) -> bool:
    return d != INFINITE


@dataclass(frozen=True)
class Graph:
    """Finite simple undirected graph over non-negative integer ids."""

    vertex_ids: frozenset[Vertex]
    edges: frozenset[Edge]

    def __post_init__(self):
        for v in self.vertex_ids:
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InputError(f"vertex ids must be non-negative integers, got {v!r}")
        for u, v in self.edges:
            if u == v:
                raise InputError(f"loop at vertex {u}", data={"edge": [u, v]})
            if u > v:
                raise InputError(f"edge ({u}, {v}) is not in canonical order")
            if u not in self.vertex_ids or v not in self.vertex_ids:
                raise InputError(f"edge ({u}, {v}) has an endpoint outside the vertex set", data={"edge": [u, v]})

    @classmethod
    def build(cls, vertices: Iterable[Vertex], edges: Iterable[tuple[Vertex, Vertex]] = ()) -> "Graph":
        return cls(frozenset(vertices), frozenset(edge_key(u, v) for u, v in edges))

    @cached_property
    def adjacency(self) -> Mapping[Vertex, tuple[Vertex, ...]]:
        neighbours: dict[Vertex, list[Vertex]] = {v: [] for v in self.vertex_ids}
        for u, v in self.edges:
            neighbours[u].append(v)
            neighbours[v].append(u)
        return MappingProxyType({v: tuple(sorted(ns)) for v, ns in neighbours.items()})

    @cached_property
    def nx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(sorted(self.vertex_ids))
        g.add_edges_from(sorted(self.edges))
        return nx.freeze(g)

    @cached_property
    def sorted_vertices(self) -> tuple[Vertex, ...]:
        return tuple(sorted(self.vertex_ids))

    def neighbors(self, v: Vertex) -> tuple[Vertex, ...]:
        return self.adjacency[v]

    def has_edge(self, u: Vertex, v: Vertex) -> bool:
        return u != v and edge_key(u, v) in self.edges

    def max_id(self) -> int:
        return max(self.vertex_ids, default=-1)

    def __len__(self) -> int:
        return len(self.vertex_ids)


@dataclass(frozen=True, eq=False)
class EdgeWeighting:
    """Total map E(host) -> non-negative integers."""

    host: Graph
    weight: Mapping[Edge, int]

    def __post_init__(self):
        weights = dict(self.weight)
        if set(weights) != set(self.host.edges):
            missing = sorted(set(self.host.edges) - set(weights))
            extra = sorted(set(weights) - set(self.host.edges))
            raise InputError(
                "weighting is not total on the host edge set",
                data={"missing": [list(e) for e in missing[:10]], "extra": [list(e) for e in extra[:10]]},
            )
        for e, w in weights.items():
            if isinstance(w, bool) or not isinstance(w, int) or w < 0:
                raise InputError(f"weight of edge {e} must be a non-negative integer, got {w!r}")
        object.__setattr__(self, "weight", MappingProxyType(weights))

    @classmethod
    def constant(cls, host: Graph, value: int) -> "EdgeWeighting":
        return cls(host, {e: value for e in host.edges})

    @classmethod
    def unit(cls, host: Graph) -> "EdgeWeighting":
        return cls.constant(host, 1)

    @classmethod
    def zero(cls, host: Graph) -> "EdgeWeighting":
        return cls.constant(host, 0)

    @property
    def size(self) -> int:
        return max(self.weight.values(), default=0)

    def of(self, u: Vertex, v: Vertex) -> int:
        return self.weight[edge_key(u, v)]

    @cached_property
    def nx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.host.sorted_vertices)
        g.add_weighted_edges_from((u, v, w) for (u, v), w in sorted(self.weight.items()))
        return nx.freeze(g)


Metric = Union[Graph, EdgeWeighting]


def host_of(metric: Metric) -> Graph:
    return metric.host if isinstance(metric, EdgeWeighting) else metric


@dataclass(frozen=True)
class Path:
    host: Graph
    vertices: tuple[Vertex, ...]

    def __post_init__(self):
        if not self.vertices:
            raise InputError("a path needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise InputError("path vertices must be pairwise distinct", data={"vertices": list(self.vertices)})
        for v in self.vertices:
            if v not in self.host.vertex_ids:
                raise InputError(f"path vertex {v} is not in the host graph")
        for u, v in zip(self.vertices, self.vertices[1:]):
            if not self.host.has_edge(u, v):
                raise InputError(f"consecutive path vertices {u}, {v} are not adjacent", data={"pair": [u, v]})

    @cached_property
    def position(self) -> Mapping[Vertex, int]:
        return MappingProxyType({v: i for i, v in enumerate(self.vertices)})

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> Vertex:
        return self.vertices[0]

    @property
    def end(self) -> Vertex:
        return self.vertices[-1]

    def edges(self) -> list[Edge]:
        return [edge_key(u, v) for u, v in zip(self.vertices, self.vertices[1:])]

    def subpath(self, u: Vertex, v: Vertex) -> "Path":
        """P[u, v] in the orientation of P."""
        i, j = sorted((self.position[u], self.position[v]))
        return Path(self.host, self.vertices[i : j + 1])

    def weight(self, hw: EdgeWeighting) -> int:
        return sum(hw.weight[e] for e in self.edges())

    def __contains__(self, v: Vertex) -> bool:
        return v in self.position

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class DistanceTable:
    """Rows of exact distances; a missing entry means INFINITE."""

    rows: Mapping[Vertex, Mapping[Vertex, int]]

    def __getitem__(self, pair: tuple[Vertex, Vertex]) -> Distance:
        u, v = pair
        return self.rows[u].get(v, INFINITE)

    def row(self, u: Vertex) -> Mapping[Vertex, int]:
        return self.rows[u]


@dataclass(frozen=True)
class VertexOrigin:
    """Where a vertex of an edited graph came from."""

    vertex: Optional[Vertex] = None
    edge: Optional[Edge] = None
    offset: int = 0
    parts: int = 1
    tail: Optional[Vertex] = None

    @property
    def is_fresh(self) -> bool:
        return self.vertex is None
