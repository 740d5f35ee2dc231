import logging
from dataclasses import dataclass
from typing import Optional

from qirw.core.config import settings
from qirw.core.exceptions import BounderContractError, InputError, InvariantViolation
from qirw.models.anchors import AnchorSystem
from qirw.models.decomposition import PathDecomposition
from qirw.models.extension import (
    AdditiveBounder,
    BounderOutcome,
    ConstantLedger,
    ExtensionResult,
    ExtensionScaffold,
    UsegeoInput,
)
from qirw.models.graph import Edge, EdgeWeighting, Graph, Path, Vertex, edge_key, is_finite
from qirw.models.quasi_isometry import INFEASIBLE, QIParams, VertexMap
from qirw.schemas.documents import WeightingDocument
from qirw.schemas.reports import (
    FAIL,
    PASS,
    AnchorSystemDocument,
    DistanceWitness,
    LedgerDocument,
    LevelReport,
    SynthesisReport,
)
from qirw.services import path_decomposition
from qirw.services.anchor_weighting import FixgeoResult, fixgeo
from qirw.services.graph_core import (
    components,
    diameter,
    distance_table,
    induced_subgraph,
    is_connected,
    is_w_geodesic,
    multi_source_dist,
    require_connected,
    shortest_path,
)
from qirw.services.quasi_isometry import check_qi, measure_params, minimal_additive, pull_back_weights, surjectivize
from qirw.utils.checks import InvariantChecker


logger = logging.getLogger(__name__)


def constants(c: int, c_prime: int) -> ConstantLedger:
    """
    Constant ledger of the extension step.

    Args:
        c (int): the (c-1, c) parameter, at least 2.
        c_prime (int): the recursive additive bound, at least 1.

    Returns:
        ConstantLedger: r, c2, c3 and c0 by exact integer evaluation.
    """
    if c < 2:
        raise InputError(f"the extension step needs c >= 2, got {c}")
    if c_prime < 1:
        raise InputError(f"the recursive bound must be at least 1, got {c_prime}")
    r = 2 * c * (c + 1)
    c2 = max(2 * c + c_prime, 4 * (r + 3) * c * c)
    c3 = c2 + c * (2 * (r + 2) * c + 2) + (r + 2) * c * c_prime + (r + 2) * c * c
    c0 = max((r + 2) * c * c, (r + 2) * c * c_prime, c2, 4 * c * c_prime + 2 * c * c + 2 * r + 2 * c * r * c3)
    return ConstantLedger(c=c, c_prime=c_prime, r=r, c2=c2, c3=c3, c0=c0)


def _unweighted_target(phi: VertexMap) -> Graph:
    if not isinstance(phi.target, Graph):
        raise InputError("the extension step needs an unweighted target")
    return phi.target


def find_spanning_geodesic(
    phi: VertexMap, d: PathDecomposition, c: int, checker: Optional[InvariantChecker] = None
) -> Path:
    """
    Geodesic of G whose distance to the preimage of every bag is at most C^2.

    Its ends are the smallest-id source vertices whose images are nearest to min(B_first)
    and max(B_last); both lie within C of them by the coverage bullet.

    Raises:
        InputError: disconnected inputs, empty bags, a bag without preimage, or no
            source vertex within C of an end bag.
    """
    checker = checker or InvariantChecker()
    h = _unweighted_target(phi)
    if d.host != h:
        raise InputError("decomposition does not belong to the target graph")
    if not d.bags or any(not bag for bag in d.bags):
        raise InputError("the decomposition must be nonempty and nowhere-null")
    require_connected(phi.source, "G")
    require_connected(h, "H")

    a, b = min(d.bags[0]), max(d.bags[-1])
    rows = distance_table(h, {a, b})

    psi = phi.preimage_selector()

    def nearest(target: Vertex) -> Vertex:
        y = min(psi, key=lambda y: (rows[target, y], psi[y]))
        if rows[target, y] > c:
            raise InputError(
                f"no source vertex maps within {c} of {target}",
                data={"vertex": target, "distance": rows[target, y]},
            )
        return psi[y]

    u, v = nearest(a), nearest(b)
    geodesic = shortest_path(phi.source, u, v)
    if geodesic is None:
        raise InputError("geodesic ends are disconnected in G", data={"ends": [u, v]})

    from_geodesic = multi_source_dist(phi.source, geodesic.vertices)
    for t, bag in enumerate(d.bags):
        preimage = phi.preimages(bag)
        if not preimage:
            raise InputError(f"bag {t} has no preimage", data={"bag": sorted(bag)})
        reach = min(from_geodesic[x] for x in preimage)
        checker.require(reach <= c * c, "geodesic is farther than C^2 from a bag preimage", bag=t, distance=reach, C=c)
    logger.debug("spanning geodesic %s..%s with %s vertices", u, v, len(geodesic))
    return geodesic


def shortjump_check(
    phi: VertexMap,
    d: PathDecomposition,
    k_graph: Graph,
    t_left: int,
    t: int,
    t_right: int,
    c: int,
    checker: Optional[InvariantChecker] = None,
) -> Vertex:
    """
    A vertex x of K with dist_H(phi(x), B_t) <= C - 1.

    Walks a K-path from a preimage of B_{t_left} to a preimage of B_{t_right}; either
    the walk enters B_t or some edge of it crosses between components of H - B_t and
    one of its ends is close to B_t.
    """
    checker = checker or InvariantChecker()
    h = _unweighted_target(phi)
    for index in (t_left, t, t_right):
        if not 0 <= index < len(d):
            raise InputError(f"bag index {index} out of range", data={"index": index, "bags": len(d)})
    if not t_left <= t <= t_right:
        raise InputError("shortjump needs t_left <= t <= t_right", data={"t_left": t_left, "t": t, "t_right": t_right})
    if not k_graph.vertex_ids <= phi.source.vertex_ids or not k_graph.edges <= phi.source.edges:
        raise InputError("K is not a subgraph of G")
    if not is_connected(k_graph):
        raise InputError("K must be connected")
    starts = [x for x in k_graph.sorted_vertices if phi(x) in d.bags[t_left]]
    ends = [x for x in k_graph.sorted_vertices if phi(x) in d.bags[t_right]]
    if not starts or not ends:
        raise InputError("K must meet the preimages of both outer bags")

    walk = shortest_path(k_graph, starts[0], ends[0]).vertices
    bag = d.bags[t]
    for x in walk:
        if phi(x) in bag:
            return x

    to_bag = multi_source_dist(h, bag)
    rest = induced_subgraph(h, h.vertex_ids - bag)
    component_of = {v: n for n, part in enumerate(components(rest)) for v in part}
    for a, b in zip(walk, walk[1:]):
        if component_of[phi(a)] != component_of[phi(b)]:
            x = min((a, b), key=lambda y: (to_bag[phi(y)], y))
            checker.require(to_bag[phi(x)] <= c - 1, "crossing edge has no end within C-1 of the bag", edge=(a, b), C=c)
            return x
    raise InvariantViolation("bag does not separate the outer bags", data={"t_left": t_left, "t": t, "t_right": t_right})


def build_scaffold(
    phi: VertexMap,
    geodesic: Path,
    c: int,
    decomposition: Optional[PathDecomposition] = None,
    checker: Optional[InvariantChecker] = None,
) -> ExtensionScaffold:
    """
    Near/far split around the geodesic, the (Y, Z) partition and the shortcut graph F.

    Args:
        phi (VertexMap): a (c-1, c)-quasi-isometry into an unweighted graph.
        geodesic (Path): the geodesic P of G.
        c (int): the extension constant; r = 2c(c+1).
        decomposition (PathDecomposition, optional): decomposition of H, restricted to X u Y
            for the recursive call.

    Returns:
        ExtensionScaffold: A, B, X, Y, Z, the boundary edges, H', F and psi: F -> H'.
    """
    checker = checker or InvariantChecker()
    g, h = phi.source, _unweighted_target(phi)
    r = 2 * c * (c + 1)
    p_images = frozenset(phi(p) for p in geodesic.vertices)

    to_p = multi_source_dist(g, geodesic.vertices)
    near = frozenset(v for v, x in to_p.items() if x <= r)
    far = g.vertex_ids - near
    far_image = frozenset(phi(b) for b in far)
    to_x = multi_source_dist(h, far_image)
    to_phi_p = multi_source_dist(h, p_images)
    y_set = frozenset(v for v in h.vertex_ids - far_image if to_x[v] <= to_phi_p[v])
    z_set = h.vertex_ids - far_image - y_set
    xy = far_image | y_set
    boundary = frozenset(e for e in h.edges if (e[0] in xy) != (e[1] in xy))
    h_prime = induced_subgraph(h, xy)

    for x in checker.items(sorted(far_image)):
        checker.require(c * to_phi_p[x] >= r - c, "far image too close to the geodesic image", vertex=x)
    reach = (r + 2) * c
    y_reach = multi_source_dist(h_prime, far_image)
    for y in checker.items(sorted(y_set)):
        checker.require(y_reach[y] <= reach, "Y vertex does not reach X inside H'", vertex=y)
        checker.require(2 * c * to_phi_p[y] >= r - c, "Y vertex too close to the geodesic image", vertex=y)
    h_z = induced_subgraph(h, z_set)
    z_reach = multi_source_dist(h_z, p_images & z_set)
    for z in checker.items(sorted(z_set)):
        checker.require(z_reach[z] <= reach, "Z vertex does not reach the geodesic image inside H[Z]", vertex=z)
        checker.require(2 * c * to_x[z] > r - c, "Z vertex too close to X", vertex=z)

    fresh_id_start = max(g.max_id(), h.max_id()) + 1
    psi = None
    f_graph = induced_subgraph(g, far)
    shortcuts = 0
    if far:
        f_graph, image, shortcuts = _shortcut_graph(phi, far, h_prime, r, c, fresh_id_start, checker)
        psi = VertexMap(f_graph, h_prime, image)
        worst = 2 * (r + 2) * c + 1
        violation = check_qi(psi, QIParams(2 * c * worst, 4 * c * worst), checker)
        checker.require(violation is None, "shortcut map exceeds its worst-case parameters", violation=str(violation))

    restricted = None
    if decomposition is not None:
        restricted = path_decomposition.restrict(decomposition, xy)
        if far:
            checker.require(
                restricted.width < decomposition.width,
                "restricted decomposition did not lose width",
                width=decomposition.width,
                restricted=restricted.width,
            )
    logger.info(
        "scaffold: c=%s r=%s |A|=%s |B|=%s |Y|=%s |Z|=%s |boundary|=%s shortcuts=%s",
        c, r, len(near), len(far), len(y_set), len(z_set), len(boundary), shortcuts,
    )
    return ExtensionScaffold(
        phi=phi,
        geodesic=geodesic,
        c=c,
        r=r,
        near=near,
        far=far,
        far_image=far_image,
        y_set=y_set,
        z_set=z_set,
        boundary=boundary,
        h_prime=h_prime,
        f_graph=f_graph,
        psi=psi,
        fresh_id_start=fresh_id_start,
        shortcut_paths=shortcuts,
        decomposition=restricted,
    )


def _shortcut_graph(phi, far, h_prime, r, c, fresh_id_start, checker):
    # G[B] plus a fresh path of length dist_G(b, b') for every pair whose images are close in H'
    g = phi.source
    ordered = sorted(far)
    g_rows = distance_table(g, ordered)
    h_rows = distance_table(h_prime, {phi(b) for b in ordered})
    limit = 2 * (r + 2) * c + 1
    vertices: set[Vertex] = set(far)
    edges: set[Edge] = {e for e in g.edges if e[0] in far and e[1] in far}
    image = {b: phi(b) for b in ordered}
    next_id = fresh_id_start
    shortcuts = 0
    for n, b in enumerate(ordered):
        for b2 in ordered[n + 1 :]:
            if h_rows[phi(b), phi(b2)] > limit:
                continue
            length = g_rows[b, b2]
            checker.require(is_finite(length), "close images with disconnected preimages", pair=(b, b2))
            if length < 2:
                continue
            chain = [b, *range(next_id, next_id + length - 1), b2]
            for step, v in enumerate(chain[1:-1], start=1):
                image[v] = phi(b) if 2 * step <= length else phi(b2)
            vertices.update(chain[1:-1])
            edges.update(edge_key(x, y) for x, y in zip(chain, chain[1:]))
            next_id += length - 1
            shortcuts += 1
    f_graph = Graph(frozenset(vertices), frozenset(edges))

    if checker.checked:
        f_rows = distance_table(f_graph, ordered)
        for b, b2 in checker.pairs(ordered):
            checker.require(f_rows[b, b2] >= g_rows[b, b2], "shortcut graph shortens a distance of G", pair=(b, b2))
    return f_graph, image, shortcuts


def _require_contract(psi: VertexMap, outcome: BounderOutcome, checker: InvariantChecker) -> int:
    if outcome.weighting.host != psi.target_graph:
        raise BounderContractError("bounder returned a weighting of the wrong graph")
    actual = minimal_additive(psi.onto(outcome.weighting)) if checker.checked else outcome.additive
    if actual is INFEASIBLE or actual > outcome.claimed or outcome.additive > outcome.claimed:
        logger.warning("bounder contract broken: certified %s, reported %s, claimed %s", actual, outcome.additive, outcome.claimed)
        raise BounderContractError(
            "recursive weighting is worse than claimed",
            data={"certified": str(actual), "reported": outcome.additive, "claimed": outcome.claimed},
        )
    return actual


def extend_weights(
    scaffold: ExtensionScaffold,
    w1: EdgeWeighting,
    bounder: AdditiveBounder,
    checker: Optional[InvariantChecker] = None,
) -> ExtensionResult:
    """
    Merge the recursive weighting on H', w1 on H[Z] and c3 on the boundary edges.

    The recursive constant c' is the certified additive constant of psi into (H', w'),
    raised to the size of w' and to 1. The ledger is evaluated with it.

    Raises:
        BounderContractError: the bounder returned a weighting worse than it claimed.
        InvariantViolation: a claim of the extension proof failed.
    """
    checker = checker or InvariantChecker()
    phi = scaffold.phi
    h = _unweighted_target(phi)
    if w1.host != h:
        raise InputError("w1 does not live on the target graph")

    outcome = None
    c_prime = 1
    if scaffold.far:
        if scaffold.decomposition is None:
            raise InputError("a far region needs the decomposition for the recursive call")
        outcome = bounder(scaffold.psi, scaffold.decomposition)
        certified = _require_contract(scaffold.psi, outcome, checker)
        c_prime = max(certified, outcome.weighting.size, 1)
    ledger = constants(scaffold.c, c_prime)

    inner = scaffold.far_image | scaffold.y_set
    weights: dict[Edge, int] = {}
    for e in h.edges:
        if e in scaffold.boundary:
            weights[e] = ledger.c3
        elif e[0] in inner:
            weights[e] = outcome.weighting.weight[e]
        else:
            weights[e] = w1.weight[e]
    w = EdgeWeighting(h, weights)

    checker.require(w.size <= ledger.c3, "merged weighting exceeds c3", size=w.size, c3=ledger.c3)
    if checker.checked:
        _assert_extension_claims(scaffold, w, ledger, checker)
    additive = minimal_additive(phi.onto(w))
    checker.require(
        additive is not INFEASIBLE and additive <= ledger.c0,
        "merged weighting is not a (1, c0)-quasi-isometry",
        additive=str(additive),
        c0=ledger.c0,
    )
    logger.info("extension: c=%s c'=%s c3=%s c0=%s additive=%s", ledger.c, c_prime, ledger.c3, ledger.c0, additive)
    return ExtensionResult(weighting=w, ledger=ledger, scaffold=scaffold, outcome=outcome)


def _assert_extension_claims(
    scaffold: ExtensionScaffold, w: EdgeWeighting, ledger: ConstantLedger, checker: InvariantChecker
) -> None:
    phi = scaffold.phi
    g, h = phi.source, phi.target
    c, r, c_prime = ledger.c, ledger.r, ledger.c_prime
    g_table = distance_table(g)
    w_rows = distance_table(w, phi.image_set)

    p = scaffold.geodesic.vertices
    for i, j in checker.pairs(range(len(p))):
        checker.require(
            w_rows[phi(p[i]), phi(p[j])] <= (j - i) + 2 * c * c,
            "weighted distance along the geodesic image too long",
            indices=(i, j),
        )

    upper = 4 * c * c_prime + 2 * c * c + 2 * r + 2 * c * r * ledger.c3
    for u, v in checker.pairs(g.sorted_vertices):
        dg, dw = g_table[u, v], w_rows[phi(u), phi(v)]
        if is_finite(dg):
            checker.require(dw <= dg + upper, "weighted image distance too long", pair=(u, v))
        if is_finite(dw):
            checker.require(dg <= dw + ledger.c2, "weighted image distance too short", pair=(u, v))

    h_z = induced_subgraph(h, scaffold.z_set)
    w_z = EdgeWeighting(h_z, {e: w.weight[e] for e in h_z.edges})
    in_z = [v for v in g.sorted_vertices if phi(v) in scaffold.z_set]
    z_rows = distance_table(w_z, {phi(v) for v in in_z})
    for u, v in checker.pairs(in_z):
        dz = z_rows[phi(u), phi(v)]
        if is_finite(dz):
            checker.require(g_table[u, v] <= dz + 4 * (r + 3) * c * c, "distance inside H[Z] too short", pair=(u, v))

    bound = (r + 2) * c * max(c, c_prime)
    reach = multi_source_dist(w, phi.image_set)
    far_off = [v for v, x in reach.items() if x > bound]
    checker.require(not far_off, "weighted coverage radius exceeded", vertices=sorted(far_off)[:10], bound=bound)


def usegeo(
    inp: UsegeoInput, bounder: AdditiveBounder, checker: Optional[InvariantChecker] = None
) -> ExtensionResult:
    """
    The extension step from an arbitrary (P, Q, J, r, w1, c) meeting its hypotheses.

    Raises:
        InputError: a hypothesis fails; the message names it.
    """
    checker = checker or InvariantChecker()
    phi, geodesic, anchors, w1, c, d = inp.phi, inp.geodesic, inp.anchors, inp.w1, inp.c, inp.decomposition
    h = _unweighted_target(phi)
    if c < 2:
        raise InputError(f"the extension step needs c >= 2, got {c}")
    violation = check_qi(phi, QIParams.normal(c), checker)
    if violation is not None:
        raise InputError(f"hypothesis 'phi is a ({c - 1},{c})-quasi-isometry' fails", data=violation.as_dict())
    if geodesic.host != phi.source or not is_w_geodesic(phi.source, geodesic, checker):
        raise InputError("hypothesis 'P is a geodesic of G' fails")
    _require_anchor_hypotheses(phi, geodesic, anchors, c, checker)

    q = anchors.q_path
    if w1.host != h:
        raise InputError("w1 does not live on the target graph")
    if w1.size > c:
        raise InputError("hypothesis 'w1 has size at most c' fails", data={"size": w1.size, "c": c})
    if not is_w_geodesic(w1, q, checker):
        raise InputError("hypothesis 'Q is a w1-geodesic' fails")
    rows = distance_table(w1, anchors.vertices)
    for (i, ri), (j, rj) in checker.pairs(anchors.pairs()):
        if rows[ri, rj] != j - i:
            raise InputError("hypothesis 'dist_w1(r_i, r_j) = j - i' fails", data={"anchors": [i, j]})

    if d.host != h:
        raise InputError("decomposition does not belong to the target graph")
    path_decomposition.require_valid(d)
    to_image = multi_source_dist(h, {phi(p) for p in geodesic.vertices})
    if not path_decomposition.width_drop_check(d, {v for v, x in to_image.items() if x <= c}):
        raise InputError("hypothesis 'the far region has smaller width' fails: a bag avoids the c-neighbourhood of phi(P)")

    scaffold = build_scaffold(phi, geodesic, c, d, checker)
    return extend_weights(scaffold, w1, bounder, checker)


def _require_anchor_hypotheses(
    phi: VertexMap, geodesic: Path, anchors: AnchorSystem, c: int, checker: InvariantChecker
) -> None:
    h = phi.target
    q = anchors.q_path
    if q.host != h:
        raise InputError("Q does not live in H")
    pairs = anchors.pairs()
    if not pairs or len(anchors.indices) != len(anchors.vertices):
        raise InputError("the anchor system needs one vertex per index")
    if any(not 0 <= j < len(geodesic) for j in anchors.indices):
        raise InputError("an anchor index lies outside the geodesic")
    if any(r not in q for r in anchors.vertices):
        raise InputError("hypothesis 'anchors are vertices of Q' fails")
    positions = [q.position[r] for r in anchors.vertices]
    ordered = all(a < b for a, b in zip(positions, positions[1:])) and all(
        a < b for a, b in zip(anchors.indices, anchors.indices[1:])
    )
    if not ordered:
        raise InputError("hypothesis 'anchors in order along Q' fails")
    if q.start != anchors.vertices[0] or q.end != anchors.vertices[-1]:
        raise InputError("hypothesis 'Q is the union of its anchor subpaths' fails")

    images = [phi(p) for p in geodesic.vertices]
    table = distance_table(h, set(images) | set(anchors.vertices))
    for j, rj in pairs:
        if table[images[j], rj] > c:
            raise InputError("hypothesis 'dist(phi(p_j), r_j) <= c' fails", data={"index": j})
    for i, image in enumerate(images):
        if not any(abs(j - i) <= c and table[image, rj] < c for j, rj in pairs):
            raise InputError("hypothesis 'every index has a nearby anchor' fails", data={"index": i})
    anchored = [images[j] for j in anchors.indices]
    for v in q.vertices:
        if min(table[x, v] for x in anchored) > c:
            raise InputError("hypothesis 'Q stays within c of the anchored images' fails", data={"vertex": v})


@dataclass(frozen=True)
class _Solution:
    weighting: EdgeWeighting
    c_prime: int
    w_bound: int
    anchors: Optional[AnchorSystem] = None


class SynthesisService:
    """
    Recursive weight synthesis on the path-width of the target.

    Each level surjectivizes the map, picks a spanning geodesic, runs the anchor stage
    and the extension step; the far region is solved per connected component one width
    lower and the weights are pulled back through the cluster contraction.
    """

    def __init__(self, checker: Optional[InvariantChecker] = None):
        self.checker = checker or InvariantChecker()
        self.levels: list[LevelReport] = []

    def synthesize(self, phi: VertexMap, d: PathDecomposition) -> SynthesisReport:
        """
        Weights on H making phi an additive quasi-isometry, with the report to certify them.

        Args:
            phi (VertexMap): map from a connected G into a connected unweighted H.
            d (PathDecomposition): a valid decomposition of H.

        Returns:
            SynthesisReport: weighting, theoretical C' and W, internal certificate, ledgers.

        Raises:
            InputError: disconnected inputs, an invalid decomposition, or phi not a quasi-isometry.
            InvariantViolation: a runtime-asserted guarantee failed.
        """
        h = _unweighted_target(phi)
        require_connected(phi.source, "G")
        require_connected(h, "H")
        if d.host != h:
            raise InputError("decomposition does not belong to the target graph")
        path_decomposition.require_valid(d)

        self.levels = []
        logger.info("synthesize: |V(G)|=%s |V(H)|=%s width=%s profile=%s", len(phi.source), len(h), d.width, self.checker.profile)
        solution = self._solve(phi, d, depth=0)
        w = solution.weighting
        internal = minimal_additive(phi.onto(w))
        witnesses = self._anchor_witnesses(solution, w)
        passed = internal is not INFEASIBLE and internal <= solution.c_prime and w.size <= solution.w_bound
        anchors = solution.anchors
        report = SynthesisReport(
            weighting=WeightingDocument.from_domain(w),
            c_prime=solution.c_prime,
            w_bound=solution.w_bound,
            internal_additive=None if internal is INFEASIBLE else internal,
            achieved_size=w.size,
            verdict=PASS if passed else FAIL,
            profile=self.checker.profile,
            levels=self.levels,
            witnesses=witnesses,
            anchors=None
            if anchors is None
            else AnchorSystemDocument(
                indices=list(anchors.indices), vertices=list(anchors.vertices), q_path=list(anchors.q_path.vertices)
            ),
        )
        logger.info(
            "synthesize: verdict=%s C'=%s W=%s internal=%s size=%s levels=%s",
            report.verdict, report.c_prime, report.w_bound, internal, w.size, len(self.levels),
        )
        return report

    def _anchor_witnesses(self, solution: _Solution, w: EdgeWeighting) -> list[DistanceWitness]:
        if solution.anchors is None:
            return []
        pairs = solution.anchors.pairs()
        chosen = list(zip(pairs, pairs[1:]))
        if len(pairs) > 2:
            chosen.append((pairs[0], pairs[-1]))
        rows = distance_table(w, solution.anchors.vertices)
        witnesses = []
        for (i, ri), (j, rj) in chosen:
            self.checker.require(rows[ri, rj] == j - i, "anchor identity lost after pull-back", anchors=(i, j))
            witnesses.append(DistanceWitness(u=ri, v=rj, distance=j - i))
        return witnesses

    def _fixgeo(self, phi: VertexMap, geodesic: Path, c: int) -> tuple[FixgeoResult, int, bool]:
        try:
            return fixgeo(phi, geodesic, c, self.checker), c, False
        except InvariantViolation as e:
            if c >= 4 or not settings.RETRY_WITH_C4:
                raise
            logger.warning("anchor stage failed with C=%s (%s); retrying with C=4", c, e.detail)
            return fixgeo(phi, geodesic, 4, self.checker), 4, True

    def _solve(self, phi: VertexMap, d: PathDecomposition, depth: int) -> _Solution:
        checker = self.checker
        level = LevelReport(depth=depth, source_vertices=len(phi.source), target_vertices=len(phi.target_graph), width=d.width)
        self.levels.append(level)

        measured = measure_params(phi, checker)
        if measured is INFEASIBLE:
            raise InputError("map is not a quasi-isometry: finite and infinite distances are mixed")
        level.measured_c = measured
        reduction = surjectivize(phi, measured, d, checker)
        phi1, h1 = reduction.phi1, reduction.h1
        remeasured = measure_params(phi1, checker)
        level.remeasured_c = remeasured
        L = max(measured - 1, 0)
        level.reduction_readings = {
            "stated": [L // (2 * measured + 1), measured],
            "proved": [L, measured],
            "remeasured": [max(remeasured - 1, 0), remeasured],
        }

        if not h1.edges:
            c_prime = diameter(phi.source)
            if not is_finite(c_prime):
                raise InputError("source graph of a single-vertex target must be connected")
            level.base_case = True
            w = pull_back_weights(EdgeWeighting.zero(h1), reduction.assignment, checker)
            logger.info("level %s: base case, C'=%s", depth, c_prime)
            return _Solution(w, c_prime, 0)

        d1 = path_decomposition.normalize_nowhere_null(reduction.decomposition)
        C = max(remeasured, 2)
        geodesic = find_spanning_geodesic(phi1, d1, C, checker)
        fixed, C, retried = self._fixgeo(phi1, geodesic, C)
        level.c_used, level.retried_with_c4 = C, retried
        D = C * C
        c = max(32 * C**4, C * D + C)
        level.c = c

        to_image = multi_source_dist(h1, {phi1(p) for p in geodesic.vertices})
        for t, bag in enumerate(d1.bags):
            checker.require(min(to_image[v] for v in bag) <= C * D + C, "bag too far from the geodesic image", bag=t)
        checker.require(
            path_decomposition.width_drop_check(d1, {v for v, x in to_image.items() if x <= c}),
            "a bag avoids the c-neighbourhood of the geodesic image",
        )

        inp = UsegeoInput(phi=phi1, geodesic=geodesic, anchors=fixed.anchors, w1=fixed.weighting, c=c, decomposition=d1)
        # every bag lies within CD + C < c of the geodesic image, so B is empty here and the
        # bounder only runs on nested inputs, see tests/test_weight_extension.py::test_usegeo_recurses_into_the_far_region
        result = usegeo(inp, self._component_bounder(depth, level), checker)
        scaffold = result.scaffold
        level.ledger = LedgerDocument.model_validate(result.ledger)
        level.far_vertices = len(scaffold.far)
        level.boundary_edges = len(scaffold.boundary)
        level.fresh_id_start = scaffold.fresh_id_start
        if scaffold.psi is not None:
            worst = 2 * (scaffold.r + 2) * c + 1
            level.shortcut_bound = [2 * c * worst, 4 * c * worst]

        w = pull_back_weights(result.weighting, reduction.assignment, checker)
        logger.info("level %s: C=%s c=%s C'=%s W=%s |B|=%s", depth, C, c, result.ledger.c0, result.ledger.c3, len(scaffold.far))
        return _Solution(w, result.ledger.c0, result.ledger.c3, fixed.anchors if not scaffold.far else None)

    def _component_bounder(self, depth: int, level: LevelReport) -> AdditiveBounder:
        def bound(psi: VertexMap, decomposition: PathDecomposition) -> BounderOutcome:
            checker = self.checker
            f, h_prime = psi.source, psi.target_graph
            measured = measure_params(psi, checker)
            level.shortcut_measured_c = None if measured is INFEASIBLE else measured
            targets = components(h_prime)
            sources = components(f)
            level.components = len(targets)
            weights: dict[Edge, int] = {}
            claimed, size_bound = 0, 0
            for part in targets:
                matching = [s for s in sources if any(psi(v) in part for v in s)]
                checker.require(len(matching) == 1, "target component is not covered by one shortcut component", component=min(part))
                source_part = matching[0]
                checker.require(all(psi(v) in part for v in source_part), "shortcut component spans two target components")
                sub_phi = VertexMap(induced_subgraph(f, source_part), induced_subgraph(h_prime, part), {v: psi(v) for v in source_part})
                sub_d = path_decomposition.restrict(decomposition, part)
                solution = self._solve(sub_phi, sub_d, depth + 1)
                weights.update(solution.weighting.weight)
                claimed = max(claimed, solution.c_prime)
                size_bound = max(size_bound, solution.w_bound)
            merged = EdgeWeighting(h_prime, weights)
            additive = minimal_additive(psi.onto(merged))
            if additive is INFEASIBLE:
                raise BounderContractError("recursive weighting leaves the shortcut map infeasible")
            return BounderOutcome(weighting=merged, additive=additive, size=merged.size, claimed=max(claimed, size_bound))

        return bound
