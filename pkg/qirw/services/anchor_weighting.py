import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from qirw.core.exceptions import InputError, InvariantViolation
from qirw.models.anchors import AnchorSystem
from qirw.models.graph import Edge, EdgeWeighting, Graph, Path, Vertex
from qirw.models.quasi_isometry import QIParams, VertexMap
from qirw.services.graph_core import distance_table, is_w_geodesic, shortest_path
from qirw.services.quasi_isometry import check_qi
from qirw.utils.checks import InvariantChecker


logger = logging.getLogger(__name__)


def _require_geodesic(phi: VertexMap, geodesic: Path, checker: InvariantChecker) -> None:
    if geodesic.host != phi.source:
        raise InputError("geodesic does not live in the source graph")
    if not is_w_geodesic(phi.source, geodesic, checker):
        raise InputError("path is not a geodesic of the source graph", data={"path": list(geodesic.vertices)})


def _greedy_indices(phi: VertexMap, geodesic: Path, c: int) -> list[int]:
    images = [phi(p) for p in geodesic.vertices]
    table = distance_table(phi.target, set(images))
    chosen = [0]
    last = len(images) - 1
    while chosen[-1] < last:
        here = images[chosen[-1]]
        reachable = [i for i in range(chosen[-1] + 1, last + 1) if table[here, images[i]] <= 2 * c]
        if not reachable:
            raise InvariantViolation("no geodesic vertex within 2C of the current anchor", data={"index": chosen[-1]})
        chosen.append(max(reachable))
    return chosen


def build_anchor_system(
    phi: VertexMap, geodesic: Path, c: int, checker: Optional[InvariantChecker] = None
) -> AnchorSystem:
    """
    Anchor sequence J, anchors r_j and the stitched path Q for a geodesic of G.

    Greedy jumps: i_{k+1} is the largest index whose image lies within 2C of the image
    of i_k, and T_k is the canonical geodesic of H between the two images. Q follows
    T_0 up to its first vertex on T_1, then T_1 up to its first vertex on T_2 and so on;
    every junction becomes the anchor of the connector index it enters.

    Raises:
        InputError: C < 2, phi is not a (C-1, C)-quasi-isometry, or the path is not a geodesic.
        InvariantViolation: a structural guarantee failed (connectors overlapping, bullets).
    """
    checker = checker or InvariantChecker()
    if c < 2:
        raise InputError(f"anchor construction needs C >= 2, got {c}")
    if not isinstance(phi.target, Graph):
        raise InputError("anchor construction needs an unweighted target")
    _require_geodesic(phi, geodesic, checker)
    violation = check_qi(phi, QIParams.normal(c), checker)
    if violation is not None:
        raise InputError(f"map is not a ({c - 1},{c})-quasi-isometry", data=violation.as_dict())

    h = phi.target
    indices = _greedy_indices(phi, geodesic, c)
    images = [phi(geodesic.vertices[i]) for i in indices]
    connectors = [shortest_path(h, a, b) for a, b in zip(images, images[1:])]

    for first in range(len(connectors)):
        for second in range(first + 2, len(connectors)):
            shared = set(connectors[first].vertices) & set(connectors[second].vertices)
            checker.require(not shared, "non-consecutive connectors intersect", connectors=(first, second), shared=shared)

    q_vertices: list[Vertex] = []
    anchors: list[tuple[int, Vertex]] = [(indices[0], images[0])]
    entry = images[0]
    for k, connector in enumerate(connectors):
        walk = connector.vertices[connector.position[entry] :]
        if k + 1 < len(connectors):
            following = set(connectors[k + 1].vertices)
            cut = next(n for n, x in enumerate(walk) if x in following)
            q_vertices.extend(walk[:cut])
            entry = walk[cut]
            anchors.append((indices[k + 1], entry))
        else:
            q_vertices.extend(walk)
            anchors.append((indices[k + 1], connector.end))
    if not connectors:
        q_vertices.append(images[0])

    # Both ends of the geodesic can share an image when there is a single connector.
    if len(anchors) > 1 and anchors[-1][1] == anchors[-2][1]:
        logger.debug("dropping final anchor %s: it coincides with anchor %s", anchors[-1], anchors[-2])
        anchors.pop()

    try:
        q_path = Path(h, tuple(q_vertices))
    except InputError as e:
        raise InvariantViolation("stitched connectors do not form a path", data={"detail": e.detail}) from e
    system = AnchorSystem(
        geodesic=geodesic,
        indices=tuple(j for j, _ in anchors),
        vertices=tuple(r for _, r in anchors),
        q_path=q_path,
        connectors=tuple(connectors),
    ).trimmed()
    _assert_anchor_bullets(phi, system, c, checker)
    logger.debug("anchor system: |J|=%s, |Q|=%s, connectors=%s", len(system.indices), len(system.q_path), len(connectors))
    return system


def _assert_anchor_bullets(phi: VertexMap, system: AnchorSystem, c: int, checker: InvariantChecker) -> None:
    h = phi.target
    q = system.q_path
    pairs = system.pairs()
    images = {j: phi(system.geodesic.vertices[j]) for j in system.indices}
    table = distance_table(h, set(system.vertices) | set(images.values()))

    checker.require(
        q.start == system.vertices[0] and q.end == system.vertices[-1],
        "Q is not the union of its anchor subpaths",
    )
    positions = [q.position.get(r, -1) for r in system.vertices]
    checker.require(
        all(a < b for a, b in zip(positions, positions[1:])) and min(positions) >= 0,
        "anchors are not distinct and in order on Q",
        anchors=system.vertices,
    )
    for (i, _), (j, _) in zip(pairs, pairs[1:]):
        checker.require(j - i <= 2 * c * c - c, "consecutive anchors too far apart in the index", gap=(i, j))
    for (i, ri), (j, rj) in checker.pairs(pairs):
        checker.require((4 * c * c - 1) * table[ri, rj] >= j - i, "anchors too close in H", anchors=(i, j))
        checker.require(abs(q.position[rj] - q.position[ri]) <= 2 * c * (j - i), "anchors too far apart on Q", anchors=(i, j))
    for j, rj in pairs:
        checker.require(table[images[j], rj] <= 2 * c, "anchor too far from its image", index=j)
    for v in checker.items(q.vertices):
        checker.require(
            min(table[x, v] for x in images.values()) <= c, "Q vertex too far from the anchored images", vertex=v
        )


def gap_weights(
    h: Graph, q: Path, anchors: Sequence[tuple[int, Vertex]], L: int, checker: Optional[InvariantChecker] = None
) -> EdgeWeighting:
    """
    Weights making Q a w-geodesic with dist_w(r_i, r_j) = j - i.

    In each gap Q[r_i, r_j] the edge at r_i gets j - i and the other gap edges get 0;
    every edge off Q gets L(2L+1).

    Raises:
        InputError: one of the four hypotheses fails; the message names it.
    """
    checker = checker or InvariantChecker()
    if L < 1:
        raise InputError(f"L must be at least 1, got {L}")
    if q.host != h:
        raise InputError("Q does not live in H")
    anchors = list(anchors)
    if not anchors:
        raise InputError("at least one anchor is needed")
    indices = [j for j, _ in anchors]
    vertices = [r for _, r in anchors]
    if any(r not in q for r in vertices):
        raise InputError("hypothesis 'anchors on Q' fails: an anchor is not a vertex of Q")
    positions = [q.position[r] for r in vertices]
    if any(a >= b for a, b in zip(positions, positions[1:])) or any(a >= b for a, b in zip(indices, indices[1:])):
        raise InputError("hypothesis 'anchors in order' fails: anchors must be distinct and increasing along Q")
    if q.start != vertices[0] or q.end != vertices[-1]:
        raise InputError("hypothesis 'Q is the union of its anchor subpaths' fails")
    for i, j in zip(indices, indices[1:]):
        if j - i > L:
            raise InputError("hypothesis 'gaps at most L' fails", data={"gap": [i, j], "L": L})
    table = distance_table(h, q.vertices)
    for (i, ri), (j, rj) in checker.pairs(anchors):
        if L * table[ri, rj] < j - i:
            raise InputError("hypothesis 'dist_H(r_i, r_j) >= (j-i)/L' fails", data={"anchors": [i, j]})
        if abs(q.position[rj] - q.position[ri]) > L * (j - i):
            raise InputError("hypothesis 'dist_Q(r_i, r_j) <= L(j-i)' fails", data={"anchors": [i, j]})

    off_path = L * (2 * L + 1)
    weights: dict[Edge, int] = {e: off_path for e in h.edges}
    for (i, ri), (j, rj) in zip(anchors, anchors[1:]):
        gap = q.subpath(ri, rj).edges()
        weights.update({e: 0 for e in gap})
        weights[gap[0]] = j - i
    w = EdgeWeighting(h, weights)

    checker.require(is_w_geodesic(w, q, checker), "Q is not a w-geodesic")
    anchor_rows = distance_table(w, vertices)
    for (i, ri), (j, rj) in checker.pairs(anchors):
        checker.require(anchor_rows[ri, rj] == j - i, "weighted anchor distance differs from the index gap", anchors=(i, j))
    if checker.checked:
        _assert_cover_bound(q, positions, indices, table, L, checker)
    return w


def _assert_cover_bound(q: Path, positions, indices, table, L: int, checker: InvariantChecker) -> None:
    # Q[x, y] sits inside Q[r_i, r_j] with j - i <= L(2L+1) dist_H(x, y)
    left, right = [], []
    for a in range(len(q)):
        left.append(indices[max(n for n, p in enumerate(positions) if p <= a)])
        right.append(indices[min(n for n, p in enumerate(positions) if p >= a)])
    for a in range(len(q)):
        i = left[a]
        for b in range(a + 1, len(q)):
            j = right[b]
            checker.require(
                j - i <= L * (2 * L + 1) * table[q.vertices[a], q.vertices[b]],
                "covering anchor interval too long",
                pair=(q.vertices[a], q.vertices[b]),
            )


@dataclass(frozen=True)
class FixgeoResult:
    weighting: EdgeWeighting
    anchors: AnchorSystem
    c: int
    L: int


def fixgeo(phi: VertexMap, geodesic: Path, c: int, checker: Optional[InvariantChecker] = None) -> FixgeoResult:
    """
    Anchor system plus gap weights with L = 4C^2 - 1; size at most 32C^4.

    Raises:
        InvariantViolation: a postcondition failed. For C in {2, 3} the bound
        dist_H(phi(p_i), r_j) < C^3 is not guaranteed and callers may retry with C = 4.
    """
    checker = checker or InvariantChecker()
    system = build_anchor_system(phi, geodesic, c, checker)
    L = 4 * c * c - 1
    w = gap_weights(phi.target, system.q_path, system.pairs(), L, checker)

    checker.require(w.size <= 32 * c**4, "fixgeo weighting exceeds 32C^4", size=w.size, C=c)
    images = [phi(p) for p in geodesic.vertices]
    table = distance_table(phi.target, system.vertices)
    for i in checker.items(range(len(images))):
        near = [
            j
            for j, rj in system.pairs()
            if abs(j - i) <= c * c and table[rj, images[i]] < c**3
        ]
        checker.require(bool(near), "no anchor within C^2 indices and C^3 distance", index=i, C=c)
    logger.info("fixgeo: C=%s, L=%s, |J|=%s, size=%s", c, L, len(system.indices), w.size)
    return FixgeoResult(w, system, c, L)

