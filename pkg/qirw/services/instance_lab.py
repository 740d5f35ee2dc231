import logging
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from qirw.core.config import settings
from qirw.core.exceptions import InputError
from qirw.models.decomposition import PathDecomposition
from qirw.models.graph import Edge, EdgeWeighting, Graph, Vertex
from qirw.models.instance import Instance
from qirw.models.quasi_isometry import VertexMap
from qirw.schemas.documents import InstanceDocument
from qirw.schemas.reports import FAIL, PASS, SynthesisReport, Verdict
from qirw.services.graph_core import contract_edges, path_graph
from qirw.services.path_decomposition import canonical_path_decomposition
from qirw.services.quasi_isometry import subdivision_map
from qirw.utils.io import write_csv, write_json


logger = logging.getLogger(__name__)

STRUCTURE_STREAM = 0
MATCHING_STREAM = 1

GROWTH_COLUMNS = [
    "generator",
    "seed",
    "width",
    "measured_c",
    "c_prime",
    "w_bound",
    "oracle_additive",
    "achieved_size",
    "verdict",
]


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream `index` of a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def _perturb(
    h: Graph, seed: int, subdivision: int, contraction: float
) -> tuple[Graph, dict[Vertex, Vertex]]:
    # subdivide every edge, then contract a random matching; merged vertices keep the image of their smaller end
    sub = subdivision_map(h, subdivision)
    g0 = sub.source
    rng = stream(seed, MATCHING_STREAM)
    edges = sorted(g0.edges)
    matched: set[Vertex] = set()
    matching: list[Edge] = []
    for n in rng.permutation(len(edges)):
        u, v = edges[n]
        if u in matched or v in matched:
            continue
        if rng.random() < contraction:
            matching.append((u, v))
            matched.update((u, v))
    g, _ = contract_edges(g0, matching)
    image = {v: sub(v) for v in g.vertex_ids}
    return g, image


def gen_pathlike(seed: int, n: int, p: int = 2, q: float = 0.0) -> Instance:
    """
    H = P_n with its width-1 decomposition; G subdivides every edge into p parts and
    contracts a random matching of density q.
    """
    if n < 1:
        raise InputError(f"pathlike needs n >= 1, got {n}")
    if p < 1:
        raise InputError(f"subdivision must be at least 1, got {p}")
    if not 0.0 <= q <= 1.0:
        raise InputError(f"contraction density must lie in [0, 1], got {q}")
    h = path_graph(n)
    g, image = _perturb(h, seed, p, q)
    return Instance(
        g=g,
        h=h,
        decomposition=canonical_path_decomposition(n),
        phi=VertexMap(g, h, image),
        provenance={"generator": "pathlike", "seed": seed, "params": {"n": n, "p": p, "q": q}},
    )


def gen_bounded_pw(seed: int, n: int, k: int, subdivision: int = 2, contraction: float = 0.25) -> Instance:
    """
    H of path-width at most k grown along a sliding window.

    Vertex v joins the current window, is adjacent to at least one window vertex, and the
    window is then cut back to a random size between 1 and k. Evicted vertices never return,
    so the bags window + {v} satisfy the interval property.
    """
    if n < 1:
        raise InputError(f"bounded_pw needs n >= 1, got {n}")
    if k < 1:
        raise InputError(f"bounded_pw needs k >= 1, got {k}")
    rng = stream(seed, STRUCTURE_STREAM)
    window: list[Vertex] = []
    edges: list[Edge] = []
    bags: list[list[Vertex]] = []
    for v in range(n):
        keep = int(rng.integers(1, k + 1))
        while len(window) > keep:
            window.pop(int(rng.integers(len(window))))
        if window:
            anchor = window[int(rng.integers(len(window)))]
            edges.append((anchor, v))
            edges.extend((u, v) for u in window if u != anchor and rng.random() < 0.5)
        bags.append(window + [v])
        window.append(v)
    h = Graph.build(range(n), edges)
    g, image = _perturb(h, seed, subdivision, contraction)
    return Instance(
        g=g,
        h=h,
        decomposition=PathDecomposition.build(h, bags),
        phi=VertexMap(g, h, image),
        provenance={
            "generator": "bounded_pw",
            "seed": seed,
            "params": {"n": n, "k": k, "subdivision": subdivision, "contraction": contraction},
        },
    )


def gen_comb(m: int) -> Instance:
    """
    Finite comb of depth m.

    Spine vertices v_i (|i| <= m) have ids i + m and are not adjacent to each other in G;
    tooth Q_j (1 <= j <= m) is a path q_j^-j ... q_j^j and v_i is joined to q_j^i for
    max(1, |i|) <= j <= m. H is the spine path with bags {v_i, v_i+1} and phi sends
    q_j^i and v_i to v_i. Truncating the two-way infinite spine makes every geodesic of
    G finite, which is why a spanning geodesic always exists here.
    """
    if m < 1:
        raise InputError(f"comb needs m >= 1, got {m}")
    spine = {i: i + m for i in range(-m, m + 1)}
    tooth: dict[tuple[int, int], Vertex] = {}
    next_id = 2 * m + 1
    for j in range(1, m + 1):
        for i in range(-j, j + 1):
            tooth[(j, i)] = next_id
            next_id += 1
    edges: list[Edge] = []
    for j in range(1, m + 1):
        edges.extend((tooth[(j, i)], tooth[(j, i + 1)]) for i in range(-j, j))
    for i, v in spine.items():
        edges.extend((v, tooth[(j, i)]) for j in range(max(1, abs(i)), m + 1))
    g = Graph.build([*spine.values(), *tooth.values()], edges)
    h = Graph.build(spine.values(), ((spine[i], spine[i + 1]) for i in range(-m, m)))
    image = {v: v for v in spine.values()}
    image.update({q: spine[i] for (_, i), q in tooth.items()})
    return Instance(
        g=g,
        h=h,
        decomposition=PathDecomposition.build(h, ([spine[i], spine[i + 1]] for i in range(-m, m))),
        phi=VertexMap(g, h, image),
        provenance={"generator": "comb", "seed": None, "params": {"m": m}},
    )


GENERATORS: dict[str, Callable[..., Instance]] = {
    "pathlike": gen_pathlike,
    "bounded_pw": gen_bounded_pw,
    "comb": gen_comb,
}


def generate(name: str, seed: int, **params) -> Instance:
    """Run a generator by name; the comb ignores the seed."""
    if name not in GENERATORS:
        raise InputError(f"unknown generator {name!r}", data={"known": sorted(GENERATORS)})
    if name == "comb":
        return gen_comb(**params)
    return GENERATORS[name](seed, **params)


def floyd_warshall(vertices: list[Vertex], weighted_edges: Iterable[tuple[Vertex, Vertex, int]]) -> np.ndarray:
    """
    Dense all-pairs distances, indexed like `vertices`; np.inf marks disconnected pairs.

    float64 is exact while every finite distance stays below 2**53; larger weights fall
    back to Python ints in an object array.
    """
    weighted_edges = list(weighted_edges)
    index = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    heaviest = max((w for _, _, w in weighted_edges), default=0)
    exact_float = (heaviest + 1) * max(n, 1) < 2**53
    dist = np.full((n, n), np.inf, dtype=float if exact_float else object)
    for i in range(n):
        dist[i, i] = 0
    for u, v, w in weighted_edges:
        a, b = index[u], index[v]
        if w < dist[a, b]:
            dist[a, b] = dist[b, a] = w
    for k in range(n):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    return dist


def oracle_additive(instance: Instance, weighting: EdgeWeighting) -> Optional[int]:
    """minimal additive constant of phi into (H, w) from two naive all-pairs tables; None if infeasible."""
    g, h, phi = instance.g, instance.h, instance.phi
    g_vertices, h_vertices = list(g.sorted_vertices), list(h.sorted_vertices)
    dg = floyd_warshall(g_vertices, ((u, v, 1) for u, v in g.edges))
    dh = floyd_warshall(h_vertices, ((u, v, w) for (u, v), w in weighting.weight.items()))
    h_index = {v: i for i, v in enumerate(h_vertices)}
    images = np.array([h_index[phi(v)] for v in g_vertices], dtype=int)
    mapped = dh[np.ix_(images, images)]

    finite_g = np.isfinite(dg.astype(float))
    finite_h = np.isfinite(mapped.astype(float))
    if (finite_g != finite_h).any():
        return None
    both = finite_g & finite_h
    worst = max((abs(int(x)) for x in (mapped[both] - dg[both])), default=0)
    reach = dh[np.unique(images)].min(axis=0)
    if not np.isfinite(reach.astype(float)).all():
        return None
    return max(worst, max((int(x) for x in reach), default=0))


def certify(instance: Instance, report: SynthesisReport) -> Verdict:
    """
    Independent check of a synthesis report.

    Recomputes the minimal additive constant with naive Floyd-Warshall tables and
    compares it, the achieved size and every recorded witness with what the report claims.
    """
    diffs: list[str] = []
    try:
        weighting = report.weighting.to_domain(instance.h)
    except (InputError, ValueError) as e:
        return Verdict(
            verdict=FAIL,
            oracle_additive=None,
            achieved_size=None,
            claimed_c_prime=report.c_prime,
            claimed_w=report.w_bound,
            diffs=[f"weighting rejected: {e}"],
        )

    oracle = oracle_additive(instance, weighting)
    if oracle is None:
        diffs.append("phi is not a quasi-isometry into (H, w): finite and infinite distances are mixed")
    elif oracle > report.c_prime:
        diffs.append(f"oracle additive constant {oracle} exceeds claimed C' {report.c_prime}")
    if report.internal_additive is not None and report.internal_additive != oracle:
        diffs.append(f"internal additive constant {report.internal_additive} differs from oracle {oracle}")
    if weighting.size > report.w_bound:
        diffs.append(f"weighting size {weighting.size} exceeds claimed W {report.w_bound}")
    if weighting.size != report.achieved_size:
        diffs.append(f"reported size {report.achieved_size} differs from actual size {weighting.size}")

    if report.witnesses:
        h_vertices = list(instance.h.sorted_vertices)
        dh = floyd_warshall(h_vertices, ((u, v, w) for (u, v), w in weighting.weight.items()))
        index = {v: i for i, v in enumerate(h_vertices)}
        for witness in report.witnesses:
            if witness.u not in index or witness.v not in index:
                diffs.append(f"witness ({witness.u}, {witness.v}) names an unknown vertex")
                continue
            actual = dh[index[witness.u], index[witness.v]]
            if actual != witness.distance:
                diffs.append(f"{witness.kind} witness ({witness.u}, {witness.v}): expected {witness.distance}, got {actual}")

    verdict = Verdict(
        verdict=FAIL if diffs else PASS,
        oracle_additive=oracle,
        achieved_size=weighting.size,
        claimed_c_prime=report.c_prime,
        claimed_w=report.w_bound,
        diffs=diffs,
    )
    logger.info("certify: verdict=%s oracle=%s size=%s diffs=%s", verdict.verdict, oracle, weighting.size, len(diffs))
    return verdict


def write_instance(instance: Instance, path: Path, expected: Optional[str] = None) -> Path:
    """Instance JSON plus an optional `<stem>.expected.json` sidecar with the expected verdict."""
    path = Path(path)
    write_json(path, InstanceDocument.from_domain(instance).model_dump(by_alias=True))
    if expected is not None:
        write_json(path.with_name(f"{path.stem}.expected.json"), {"verdict": expected})
    return path


def write_corpus(
    name: str, seeds: Iterable[int], root: Optional[Path] = None, expected: str = PASS, **params
) -> list[Path]:
    """instances/<generator>/<seed>.json for each seed."""
    root = Path(root or settings.CORPUS_DIR) / name
    written = [write_instance(generate(name, seed, **params), root / f"{seed}.json", expected) for seed in seeds]
    logger.info("corpus: wrote %s %s instances under %s", len(written), name, root)
    return written


def growth_row(instance: Instance, report: SynthesisReport, verdict: Verdict) -> dict:
    top = report.levels[0] if report.levels else None
    provenance = instance.provenance or {}
    return {
        "generator": provenance.get("generator", ""),
        "seed": provenance.get("seed", ""),
        "width": instance.decomposition.width,
        "measured_c": top.measured_c if top else "",
        "c_prime": report.c_prime,
        "w_bound": report.w_bound,
        "oracle_additive": "" if verdict.oracle_additive is None else verdict.oracle_additive,
        "achieved_size": report.achieved_size,
        "verdict": verdict.verdict,
    }


def write_growth_csv(rows: Iterable[dict], path: Path, append: bool = False) -> Path:
    return write_csv(Path(path), GROWTH_COLUMNS, rows, append=append)
