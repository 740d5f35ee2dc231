import logging
import itertools
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Mapping, Optional

import networkx as nx

from qirw.core.config import settings
from qirw.core.exceptions import InputError
from qirw.models.graph import (
    INFINITE,
    Distance,
    DistanceTable,
    Edge,
    EdgeWeighting,
    Graph,
    Metric,
    Path,
    Vertex,
    VertexOrigin,
    edge_key,
    host_of,
)
from qirw.utils.checks import InvariantChecker


logger = logging.getLogger(__name__)


def _require_vertices(g: Graph, *vertices: Vertex) -> None:
    for v in vertices:
        if v not in g.vertex_ids:
            raise InputError(f"unknown vertex id {v}", data={"vertex": v})


def _nx_of(metric: Metric) -> nx.Graph:
    return metric.nx


def single_source(metric: Metric, source: Vertex) -> dict[Vertex, int]:
    """Distances from `source` to every vertex it reaches."""
    if isinstance(metric, EdgeWeighting):
        return nx.single_source_dijkstra_path_length(metric.nx, source, weight="weight")
    return nx.single_source_shortest_path_length(metric.nx, source)


def dist(g: Graph, u: Vertex, v: Vertex) -> Distance:
    _require_vertices(g, u, v)
    try:
        return nx.shortest_path_length(g.nx, u, v)
    except nx.NetworkXNoPath:
        return INFINITE


def wdist(hw: EdgeWeighting, u: Vertex, v: Vertex) -> Distance:
    _require_vertices(hw.host, u, v)
    try:
        return nx.dijkstra_path_length(hw.nx, u, v, weight="weight")
    except nx.NetworkXNoPath:
        return INFINITE


def distance_table(metric: Metric, sources: Optional[Iterable[Vertex]] = None) -> DistanceTable:
    """One row per source; rows are computed in parallel up to QIRW_THREADS."""
    host = host_of(metric)
    ordered = host.sorted_vertices if sources is None else sorted(set(sources))
    _require_vertices(host, *ordered)
    workers = max(1, settings.THREADS)
    if workers == 1 or len(ordered) < 2:
        rows = [single_source(metric, s) for s in ordered]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda s: single_source(metric, s), ordered))
    return DistanceTable(dict(zip(ordered, rows)))


def multi_source_dist(metric: Metric, sources: Iterable[Vertex]) -> dict[Vertex, Distance]:
    """Distance from every vertex to the nearest member of `sources`."""
    host = host_of(metric)
    sources = sorted(set(sources))
    _require_vertices(host, *sources)
    result: dict[Vertex, Distance] = {v: INFINITE for v in host.vertex_ids}
    if not sources:
        return result
    result.update(nx.multi_source_dijkstra_path_length(_nx_of(metric), sources, weight="weight"))
    return result


def _ordering_cost(metric: Metric, scale: int):
    # (weight, hop count) packed into one int; hop counts stay below `scale`
    if isinstance(metric, EdgeWeighting):
        return lambda u, v, _attrs: metric.weight[edge_key(u, v)] * scale + 1
    return lambda u, v, _attrs: 1


def shortest_path(metric: Metric, u: Vertex, v: Vertex) -> Optional[Path]:
    """
    Minimum-weight u-v path, fewest edges among those, then the lexicographically
    smallest vertex-id sequence. None when u and v are disconnected.
    """
    host = host_of(metric)
    _require_vertices(host, u, v)
    cost = _ordering_cost(metric, len(host) + 1)
    to_target = nx.single_source_dijkstra_path_length(host.nx, v, weight=cost)
    if u not in to_target:
        return None
    sequence = [u]
    current = u
    while current != v:
        current = min(
            y
            for y in host.adjacency[current]
            if y in to_target and to_target[y] + cost(current, y, None) == to_target[current]
        )
        sequence.append(current)
    return Path(host, tuple(sequence))


def is_w_geodesic(metric: Metric, q: Path, checker: Optional[InvariantChecker] = None) -> bool:
    """True iff every subpath of q realises the distance between its ends."""
    if q.host != host_of(metric):
        raise InputError("path does not live in the weighted host")
    checker = checker or InvariantChecker()
    weights = [metric.of(a, b) if isinstance(metric, EdgeWeighting) else 1 for a, b in zip(q.vertices, q.vertices[1:])]
    prefix = list(itertools.accumulate(weights, initial=0))
    for i in checker.items(range(len(q))):
        row = single_source(metric, q.vertices[i])
        for j in range(i + 1, len(q)):
            if row.get(q.vertices[j], INFINITE) != prefix[j] - prefix[i]:
                return False
    return True


def subdivide_edges(
    g: Graph, edges: Iterable[tuple[Vertex, Vertex]], parts: int, tails: Optional[Mapping[Edge, Vertex]] = None
) -> tuple[Graph, dict[Vertex, VertexOrigin]]:
    """
    Replace each listed edge by a path with `parts` edges through fresh vertices.

    Fresh ids start above the largest id of g. The provenance map records, for every
    vertex of the result, either the original vertex or the subdivided edge together
    with the number of steps from the edge's tail (its lower end unless `tails` says
    otherwise).

    Raises:
        InputError: parts < 1, or an edge is not an edge of g.
    """
    if parts < 1:
        raise InputError(f"parts must be a positive integer, got {parts}")
    chosen = sorted({edge_key(u, v) for u, v in edges})
    for e in chosen:
        if e not in g.edges:
            raise InputError(f"edge {e} is not an edge of the graph", data={"edge": list(e)})
    tails = tails or {}
    provenance = {v: VertexOrigin(vertex=v) for v in g.vertex_ids}
    if parts == 1:
        return g, provenance

    vertices = set(g.vertex_ids)
    new_edges = set(g.edges) - set(chosen)
    next_id = g.max_id() + 1
    for e in chosen:
        tail = tails.get(e, e[0])
        if tail not in e:
            raise InputError(f"tail {tail} is not an endpoint of {e}")
        head = e[1] if tail == e[0] else e[0]
        chain = [tail]
        for step in range(1, parts):
            vertices.add(next_id)
            provenance[next_id] = VertexOrigin(edge=e, offset=step, parts=parts, tail=tail)
            chain.append(next_id)
            next_id += 1
        chain.append(head)
        new_edges.update(edge_key(a, b) for a, b in zip(chain, chain[1:]))
    return Graph(frozenset(vertices), frozenset(new_edges)), provenance


def contract_edges(g: Graph, matching: Iterable[tuple[Vertex, Vertex]]) -> tuple[Graph, dict[Vertex, Vertex]]:
    """
    Merge the ends of every matching edge into its smaller end.

    Returns the contracted graph and the quotient map V(g) -> V(result).
    """
    chosen = sorted({edge_key(u, v) for u, v in matching})
    seen: set[Vertex] = set()
    for e in chosen:
        if e not in g.edges:
            raise InputError(f"edge {e} is not an edge of the graph", data={"edge": list(e)})
        if e[0] in seen or e[1] in seen:
            raise InputError("contraction input is not a matching", data={"edge": list(e)})
        seen.update(e)
    quotient = {v: v for v in g.vertex_ids}
    for a, b in chosen:
        quotient[b] = a
    edges = {edge_key(quotient[u], quotient[v]) for u, v in g.edges if quotient[u] != quotient[v]}
    return Graph(frozenset(quotient.values()), frozenset(edges)), quotient


def induced_subgraph(g: Graph, keep: Iterable[Vertex]) -> Graph:
    keep = frozenset(keep)
    _require_vertices(g, *keep)
    return Graph(keep, frozenset(e for e in g.edges if e[0] in keep and e[1] in keep))


def components(g: Graph) -> list[frozenset[Vertex]]:
    """Connected components ordered by their smallest id."""
    return sorted((frozenset(c) for c in nx.connected_components(g.nx)), key=min)


def is_connected(g: Graph) -> bool:
    return len(g) > 0 and len(components(g)) == 1


def diameter(g: Graph) -> Distance:
    """Largest pairwise distance; INFINITE when disconnected, 0 for at most one vertex."""
    if len(g) <= 1:
        return 0
    if not is_connected(g):
        return INFINITE
    return max(max(single_source(g, s).values()) for s in g.sorted_vertices)


def materialize(hw: EdgeWeighting, checker: Optional[InvariantChecker] = None) -> tuple[Graph, dict[Vertex, Vertex]]:
    """
    Unweighted graph whose hop distances reproduce the weighted ones.

    Zero-weight components are contracted to their smallest id, parallel edges keep
    their lightest weight and every surviving edge of weight w becomes a path of w
    edges.
    """
    host = hw.host
    zero = nx.Graph()
    zero.add_nodes_from(host.vertex_ids)
    zero.add_edges_from(e for e, w in hw.weight.items() if w == 0)
    quotient: dict[Vertex, Vertex] = {}
    for component in nx.connected_components(zero):
        representative = min(component)
        quotient.update({v: representative for v in component})

    lightest: dict[Edge, int] = {}
    for (u, v), w in hw.weight.items():
        if quotient[u] == quotient[v]:
            continue
        e = edge_key(quotient[u], quotient[v])
        lightest[e] = min(w, lightest.get(e, w))

    result = Graph(frozenset(quotient.values()), frozenset(lightest))
    for w in sorted(set(lightest.values())):
        if w > 1:
            result, _ = subdivide_edges(result, [e for e, x in lightest.items() if x == w], w)

    checker = checker or InvariantChecker()
    if checker.checked:
        for u in host.sorted_vertices:
            expected = single_source(hw, u)
            actual = single_source(result, quotient[u])
            for v in host.sorted_vertices:
                checker.require(
                    expected.get(v, INFINITE) == actual.get(quotient[v], INFINITE),
                    "materialized distances differ from weighted distances",
                    pair=(u, v),
                )
    return result, quotient


def to_dot(metric: Metric, name: str = "H") -> str:
    host = host_of(metric)
    lines = [f"graph {name} {{"]
    lines += [f"  {v};" for v in host.sorted_vertices]
    for u, v in sorted(host.edges):
        label = f' [label="{metric.weight[(u, v)]}"]' if isinstance(metric, EdgeWeighting) else ""
        lines.append(f"  {u} -- {v}{label};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def path_graph(n: int) -> Graph:
    return Graph.build(range(n), ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InputError("a cycle needs at least three vertices")
    return Graph.build(range(n), ((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Graph:
    return Graph.build(range(n), itertools.combinations(range(n), 2))


def star_graph(leaves: int) -> Graph:
    return Graph.build(range(leaves + 1), ((0, i) for i in range(1, leaves + 1)))


def disjoint_union(*graphs: Graph) -> Graph:
    """Union of graphs whose vertex sets must already be disjoint."""
    vertices: set[Vertex] = set()
    edges: set[Edge] = set()
    for g in graphs:
        if vertices & g.vertex_ids:
            raise InputError("graphs share vertex ids")
        vertices |= g.vertex_ids
        edges |= g.edges
    return Graph(frozenset(vertices), frozenset(edges))


def require_connected(g: Graph, role: str) -> None:
    if not is_connected(g):
        raise InputError(f"{role} must be connected", data={"components": len(components(g))})

