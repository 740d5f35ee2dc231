import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from qirw.core.exceptions import InputError, InvariantViolation
from qirw.models.decomposition import PathDecomposition
from qirw.models.graph import INFINITE, DistanceTable, Edge, EdgeWeighting, Graph, Vertex, edge_key, is_finite
from qirw.models.quasi_isometry import (
    INFEASIBLE,
    ClusterAssignment,
    Constant,
    QIParams,
    QIViolation,
    VertexMap,
)
from qirw.services import path_decomposition
from qirw.services.graph_core import contract_edges, distance_table, materialize, multi_source_dist, subdivide_edges
from qirw.utils.checks import InvariantChecker


logger = logging.getLogger(__name__)


@lru_cache(maxsize=16)
def metric_tables(phi: VertexMap) -> tuple[DistanceTable, DistanceTable]:
    """All-pairs source distances and target distances from every image vertex."""
    return distance_table(phi.source), distance_table(phi.target, phi.image_set)


def _coverage(phi: VertexMap, target_table: DistanceTable) -> dict[Vertex, float]:
    nearest: dict[Vertex, float] = {}
    for y in phi.target_graph.sorted_vertices:
        nearest[y] = min((target_table[z, y] for z in phi.image_set), default=INFINITE)
    return nearest


def check_qi(phi: VertexMap, params: QIParams, checker: Optional[InvariantChecker] = None) -> Optional[QIViolation]:
    """
    Check the three bullets of the (L, C)-quasi-isometry definition, finiteness guards included.

    Returns:
        QIViolation | None: the first violated bullet, or None when phi passes.
    """
    checker = checker or InvariantChecker()
    g_table, h_table = metric_tables(phi)
    L, C = params.L, params.C
    for u, v in checker.pairs(phi.source.sorted_vertices):
        dg = g_table[u, v]
        dh = h_table[phi(u), phi(v)]
        if is_finite(dg) and dh > L * dg + C:
            return QIViolation(1, (u, v), f"target distance {dh} exceeds {L}*{dg}+{C}")
        if is_finite(dh) and dg > L * dh + C:
            return QIViolation(2, (u, v), f"source distance {dg} exceeds {L}*{dh}+{C}")
    for y, reach in _coverage(phi, h_table).items():
        if reach > C:
            return QIViolation(3, (y,), f"target vertex {y} is {reach} away from the image")
    return None


def minimal_additive(phi: VertexMap) -> Constant:
    """Smallest C' with phi a (1, C')-quasi-isometry, by direct maximisation of the deficits."""
    g_table, h_table = metric_tables(phi)
    worst = 0
    vertices = phi.source.sorted_vertices
    for i, u in enumerate(vertices):
        for v in vertices[i + 1 :]:
            dg = g_table[u, v]
            dh = h_table[phi(u), phi(v)]
            if is_finite(dg) != is_finite(dh):
                return INFEASIBLE
            if is_finite(dg):
                worst = max(worst, abs(dh - dg))
    reach = max(_coverage(phi, h_table).values(), default=0)
    if not is_finite(reach):
        return INFEASIBLE
    return max(worst, reach)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def measure_params(phi: VertexMap, checker: Optional[InvariantChecker] = None) -> Constant:
    """
    Smallest C >= 1 with phi a (C-1, C)-quasi-isometry.

    dH <= (C-1)dG + C is dH + dG <= C(dG + 1), so each pair bounds C from below
    by a ceiling; the symmetric bullet and the coverage radius do the same.
    """
    checker = checker or InvariantChecker()
    g_table, h_table = metric_tables(phi)
    need = 1
    vertices = phi.source.sorted_vertices
    for i, u in enumerate(vertices):
        for v in vertices[i + 1 :]:
            dg = g_table[u, v]
            dh = h_table[phi(u), phi(v)]
            if is_finite(dg) != is_finite(dh):
                return INFEASIBLE
            if is_finite(dg):
                need = max(need, _ceil_div(dg + dh, dg + 1), _ceil_div(dg + dh, dh + 1))
    reach = max(_coverage(phi, h_table).values(), default=0)
    if not is_finite(reach):
        return INFEASIBLE
    need = max(need, reach)
    violation = check_qi(phi, QIParams.normal(need), checker)
    checker.require(violation is None, "measured parameters do not pass check_qi", C=need, violation=str(violation))
    return need


@dataclass(frozen=True)
class Surjectivization:
    h1: Graph
    phi1: VertexMap
    assignment: ClusterAssignment
    decomposition: PathDecomposition


def cluster_assignment(phi: VertexMap, c: int) -> ClusterAssignment:
    """
    Breadth-first clusters around the image set.

    Each vertex of layer k+1 joins the cluster of its smallest-id neighbour in layer k.

    Raises:
        InputError: a target vertex is farther than c from the image.
    """
    host = phi.target_graph
    owner = {z: z for z in phi.image_set}
    depth = {z: 0 for z in phi.image_set}
    layer = sorted(phi.image_set)
    level = 0
    while layer:
        level += 1
        layer_set = set(layer)
        upcoming = sorted({y for x in layer for y in host.adjacency[x] if y not in owner})
        for y in upcoming:
            parent = min(x for x in host.adjacency[y] if x in layer_set)
            owner[y] = owner[parent]
            depth[y] = level
        layer = upcoming

    uncovered = sorted(v for v in host.vertex_ids if v not in owner or depth[v] > c)
    if uncovered:
        v = uncovered[0]
        raise InputError(
            f"target vertex {v} is not within {c} of the image",
            data={"vertex": v, "distance": depth.get(v, "infinite"), "C": c},
        )
    clusters: dict[Vertex, set[Vertex]] = {z: set() for z in phi.image_set}
    for v, z in owner.items():
        clusters[z].add(v)
    return ClusterAssignment(host, {z: frozenset(m) for z, m in clusters.items()}, owner, depth)


def surjectivize(
    phi: VertexMap, c: int, decomposition: PathDecomposition, checker: Optional[InvariantChecker] = None
) -> Surjectivization:
    """
    Contract BFS clusters around the image so the map becomes onto.

    Args:
        phi (VertexMap): map into an unweighted target.
        c (int): coverage constant of phi.
        decomposition (PathDecomposition): decomposition of the target.

    Returns:
        Surjectivization: contracted target H1 (vertex ids are the cluster representatives),
        the map into H1 (same assignment), the clusters and the image decomposition.
    """
    if not isinstance(phi.target, Graph):
        raise InputError("surjectivize needs an unweighted target")
    if decomposition.host != phi.target:
        raise InputError("decomposition does not belong to the target graph")
    checker = checker or InvariantChecker()
    assignment = cluster_assignment(phi, c)
    owner = assignment.owner
    h1 = Graph(
        frozenset(assignment.clusters),
        frozenset(edge_key(owner[u], owner[v]) for u, v in phi.target.edges if owner[u] != owner[v]),
    )
    phi1 = VertexMap(phi.source, h1, phi.image)
    d1 = path_decomposition.quotient(decomposition, owner, h1)
    checker.require(d1.width <= decomposition.width, "surjectivization increased the width")
    checker.require(phi1.is_surjective(), "surjectivized map is not onto")
    logger.debug("surjectivize: %s target vertices -> %s clusters", len(phi.target), len(h1))
    return Surjectivization(h1, phi1, assignment, d1)


def pull_back_weights(
    w1: EdgeWeighting, assignment: ClusterAssignment, checker: Optional[InvariantChecker] = None
) -> EdgeWeighting:
    """
    Weights on the uncontracted target: inter-cluster edges inherit the weight of the
    contracted edge they became, intra-cluster edges get 0.
    """
    owner = assignment.owner
    weights: dict[Edge, int] = {}
    for u, v in assignment.host.edges:
        a, b = owner[u], owner[v]
        weights[(u, v)] = 0 if a == b else w1.of(a, b)
    w = EdgeWeighting(assignment.host, weights)

    checker = checker or InvariantChecker()
    representatives = sorted(assignment.representatives)
    before = distance_table(w1, representatives)
    after = distance_table(w, representatives)
    for z, y in checker.pairs(representatives):
        checker.require(before[z, y] == after[z, y], "pull-back changed a distance between representatives", pair=(z, y))
    reach = multi_source_dist(w, representatives)
    checker.require(all(d == 0 for d in reach.values()), "pulled-back weighting leaves a vertex away from the image")
    return w


def compose_qi(
    outer: VertexMap, outer_params: QIParams, inner: VertexMap, inner_params: QIParams
) -> tuple[VertexMap, QIParams]:
    """theta = outer . inner with parameters (L1 L2, max(L1 C2 + 2 C1, L2 C1 + C2))."""
    if inner.target != outer.source:
        raise InputError("inner map does not land in the source of the outer map")
    theta = VertexMap(inner.source, outer.target, {v: outer(inner(v)) for v in inner.source.vertex_ids})
    l1, c1 = outer_params.L, outer_params.C
    l2, c2 = inner_params.L, inner_params.C
    params = QIParams(l1 * l2, max(l1 * c2 + 2 * c1, l2 * c1 + c2))
    violation = check_qi(theta, params)
    if violation is not None:
        raise InvariantViolation("composed map fails its computed parameters", data=violation.as_dict())
    return theta, params


def subdivision_map(g: Graph, parts: int = 2, edges: Optional[Iterable[Edge]] = None, tails=None) -> VertexMap:
    """
    Map from g with subdivided edges back onto g.

    A fresh vertex s steps from its edge's tail goes to the tail when 2s <= parts and to
    the head otherwise.
    """
    subdivided, provenance = subdivide_edges(g, g.edges if edges is None else edges, parts, tails)
    image = {}
    for v, origin in provenance.items():
        if not origin.is_fresh:
            image[v] = origin.vertex
            continue
        head = origin.edge[1] if origin.tail == origin.edge[0] else origin.edge[0]
        image[v] = origin.tail if 2 * origin.offset <= origin.parts else head
    return VertexMap(subdivided, g, image)


def contraction_map(g: Graph, matching: Iterable[Edge]) -> VertexMap:
    """Map from g with a contracted matching back onto g; merged vertices go to their smaller end."""
    contracted, quotient_map = contract_edges(g, matching)
    return VertexMap(contracted, g, {q: q for q in set(quotient_map.values())})


def materialize_map(phi: VertexMap, hw: EdgeWeighting) -> VertexMap:
    """phi followed by the quotient of materialize(hw)."""
    if phi.target_graph != hw.host:
        raise InputError("weighting does not live on the target of the map")
    graph, quotient_map = materialize(hw)
    return VertexMap(phi.source, graph, {v: quotient_map[phi(v)] for v in phi.source.vertex_ids})

