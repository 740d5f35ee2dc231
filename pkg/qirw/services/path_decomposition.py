import logging
from typing import Iterable, Mapping, Optional

from qirw.core.config import settings
from qirw.core.exceptions import InputError, InvariantViolation, ResourceError
from qirw.models.decomposition import PathDecomposition, Violation
from qirw.models.graph import Graph, Vertex
from qirw.services.graph_core import components, induced_subgraph, path_graph


logger = logging.getLogger(__name__)

VERTEX_COVER = "vertex-cover"
EDGE_COVER = "edge-cover"
INTERVAL = "interval"
UNKNOWN_VERTEX = "unknown-vertex"


def validate(d: PathDecomposition) -> list[Violation]:
    """
    Check the three path-decomposition axioms.

    Returns:
        list[Violation]: empty when the decomposition is valid.
    """
    violations: list[Violation] = []
    host = d.host
    positions: dict[Vertex, list[int]] = {}
    for t, bag in enumerate(d.bags):
        for v in bag:
            if v not in host.vertex_ids:
                violations.append(Violation(UNKNOWN_VERTEX, (v, t)))
            positions.setdefault(v, []).append(t)

    for v in host.sorted_vertices:
        if v not in positions:
            violations.append(Violation(VERTEX_COVER, (v,)))

    for u, v in sorted(host.edges):
        if not any(u in bag and v in bag for bag in d.bags):
            violations.append(Violation(EDGE_COVER, (u, v)))

    for v in sorted(positions):
        spots = positions[v]
        for first, second in zip(spots, spots[1:]):
            if second > first + 1:
                # v sits in B_first and B_second but not in the bag right after B_first
                violations.append(Violation(INTERVAL, (v, first, first + 1, second)))
                break
    return violations


def is_valid(d: PathDecomposition) -> bool:
    return not validate(d)


def width(d: PathDecomposition) -> int:
    return d.width


def normalize_nowhere_null(d: PathDecomposition) -> PathDecomposition:
    return PathDecomposition(d.host, tuple(bag for bag in d.bags if bag))


def canonical_path_decomposition(n: int) -> PathDecomposition:
    """Bags {i, i+1} of the path 0-1-...-(n-1); a single bag {0} when n == 1."""
    host = path_graph(n)
    if n == 1:
        return PathDecomposition.build(host, [[0]])
    return PathDecomposition.build(host, ([i, i + 1] for i in range(n - 1)))


def exact_pathwidth(g: Graph, k_max: Optional[int] = None) -> Optional[tuple[int, PathDecomposition]]:
    """
    Minimum-width path decomposition by search over vertex orderings.

    Uses the vertex-separation form of path-width: the best ordering of a prefix set S
    costs max(|boundary(S)|, best(S - v)) minimised over its last vertex v.

    Raises:
        ResourceError: the graph has more vertices than PATHWIDTH_VERTEX_CAP.
    """
    n = len(g)
    if n > settings.PATHWIDTH_VERTEX_CAP:
        raise ResourceError(
            f"exact path-width search is capped at {settings.PATHWIDTH_VERTEX_CAP} vertices, got {n}; "
            "supply a decomposition instead",
            data={"vertices": n, "cap": settings.PATHWIDTH_VERTEX_CAP},
        )
    if n == 0:
        return (-1, PathDecomposition(g, ())) if k_max is None or k_max >= -1 else None

    ids = g.sorted_vertices
    index = {v: i for i, v in enumerate(ids)}
    neighbour_mask = [0] * n
    for u, v in g.edges:
        neighbour_mask[index[u]] |= 1 << index[v]
        neighbour_mask[index[v]] |= 1 << index[u]

    def boundary(mask: int) -> int:
        return sum(1 for i in range(n) if mask >> i & 1 and neighbour_mask[i] & ~mask)

    full = (1 << n) - 1
    best = [0] * (full + 1)
    border = [0] * (full + 1)
    for mask in range(1, full + 1):
        border[mask] = boundary(mask)
        best[mask] = max(border[mask], min(best[mask & ~(1 << i)] for i in range(n) if mask >> i & 1))

    if k_max is not None and best[full] > k_max:
        return None

    order: list[int] = []
    mask = full
    while mask:
        last = next(i for i in range(n) if mask >> i & 1 and max(border[mask], best[mask & ~(1 << i)]) == best[mask])
        order.append(last)
        mask &= ~(1 << last)
    order.reverse()

    bags = []
    prefix = 0
    for i in order:
        bags.append({ids[j] for j in range(n) if prefix >> j & 1 and neighbour_mask[j] & ~prefix} | {ids[i]})
        prefix |= 1 << i
    decomposition = PathDecomposition.build(g, bags)
    if not is_valid(decomposition) or decomposition.width > best[full]:
        raise InvariantViolation("ordering search produced an invalid decomposition")
    logger.debug("exact path-width %s on %s vertices", decomposition.width, n)
    return decomposition.width, decomposition


def separator_bag_check(d: PathDecomposition, t: int, t_left: int, t_right: int) -> bool:
    """True iff every path between B[t_left] and B[t_right] meets B[t]."""
    for index in (t, t_left, t_right):
        if not 0 <= index < len(d):
            raise InputError(f"bag index {index} out of range", data={"index": index, "bags": len(d)})
    if not t_left <= t <= t_right:
        raise InputError("separator check needs t_left <= t <= t_right", data={"t": t, "t_left": t_left, "t_right": t_right})
    separator = d.bags[t]
    rest = induced_subgraph(d.host, d.host.vertex_ids - separator)
    left, right = d.bags[t_left] - separator, d.bags[t_right] - separator
    return not any(component & left and component & right for component in components(rest))


def restrict(d: PathDecomposition, keep: Iterable[Vertex]) -> PathDecomposition:
    keep = frozenset(keep)
    if not keep <= d.host.vertex_ids:
        raise InputError("restriction set is not a subset of the host vertices", data={"extra": sorted(keep - d.host.vertex_ids)})
    return PathDecomposition(induced_subgraph(d.host, keep), tuple(bag & keep for bag in d.bags))


def width_drop_check(d: PathDecomposition, hit_set: Iterable[Vertex]) -> bool:
    """Every nonempty bag meets hit_set, so deleting it lowers the width."""
    hit_set = frozenset(hit_set)
    return all(bag & hit_set for bag in d.bags if bag)


def quotient(d: PathDecomposition, owner: Mapping[Vertex, Vertex], host: Graph) -> PathDecomposition:
    """Image of d under a quotient whose classes induce connected subgraphs."""
    image = PathDecomposition(host, tuple(frozenset(owner[v] for v in bag) for bag in d.bags))
    problems = validate(image)
    if problems:
        raise InvariantViolation(
            "quotient of a decomposition is not a decomposition",
            data={"violations": [p.as_dict() for p in problems[:10]]},
        )
    return image


def require_valid(d: PathDecomposition) -> None:
    problems = validate(d)
    if problems:
        raise InputError(
            "invalid path decomposition", data={"violations": [p.as_dict() for p in problems[:20]]}
        )
