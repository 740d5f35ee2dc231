import pytest
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st

from qirw.core.config import settings
from qirw.core.exceptions import InputError
from qirw.models.graph import INFINITE, EdgeWeighting, Graph, Path
from qirw.services.graph_core import (
    contract_edges,
    cycle_graph,
    diameter,
    dist,
    distance_table,
    is_w_geodesic,
    materialize,
    path_graph,
    shortest_path,
    subdivide_edges,
    to_dot,
    wdist,
)

from tests.strategies import connected_graphs, graphs, weightings


def test_dist_counts_edges_on_a_path():
    assert dist(path_graph(3), 0, 2) == 2


def test_dist_to_self_is_zero(triangle):
    assert all(dist(triangle, v, v) == 0 for v in triangle.vertex_ids)


def test_dist_between_components_is_infinite():
    g = Graph.build(range(4), [(0, 1), (2, 3)])
    assert dist(g, 0, 2) == INFINITE


def test_dist_rejects_unknown_vertex(triangle):
    with pytest.raises(InputError):
        dist(triangle, 0, 7)


def test_wdist_single_edge():
    g = path_graph(2)
    assert wdist(EdgeWeighting(g, {(0, 1): 5}), 0, 1) == 5


def test_wdist_zero_weighting_collapses_distances():
    hw = EdgeWeighting.zero(path_graph(5))
    assert all(wdist(hw, 0, v) == 0 for v in range(5))


def test_wdist_prefers_the_lighter_detour(triangle):
    hw = EdgeWeighting(triangle, {(0, 1): 3, (1, 2): 1, (0, 2): 1})
    assert wdist(hw, 0, 1) == 2


def test_weighting_must_be_total(triangle):
    with pytest.raises(InputError):
        EdgeWeighting(triangle, {(0, 1): 1})


def test_single_vertex_path_is_a_geodesic(triangle):
    assert is_w_geodesic(EdgeWeighting.unit(triangle), Path(triangle, (1,)))


def test_two_sides_of_a_triangle_are_not_a_geodesic(triangle):
    assert not is_w_geodesic(EdgeWeighting.unit(triangle), Path(triangle, (0, 1, 2)))


def test_whole_path_graph_is_a_geodesic_for_any_weights():
    g = path_graph(6)
    hw = EdgeWeighting(g, {e: w for e, w in zip(sorted(g.edges), [4, 0, 2, 7, 1])})
    assert is_w_geodesic(hw, Path(g, tuple(range(6))))


def test_shortest_path_follows_the_unique_route():
    assert shortest_path(path_graph(3), 0, 2).vertices == (0, 1, 2)


def test_shortest_path_breaks_ties_by_vertex_ids():
    assert shortest_path(cycle_graph(4), 0, 2).vertices == (0, 1, 2)


def test_shortest_path_between_components_is_none():
    g = Graph.build(range(4), [(0, 1), (2, 3)])
    assert shortest_path(g, 1, 3) is None


def test_weighted_shortest_path_takes_fewest_edges_among_lightest():
    g = Graph.build(range(4), [(0, 1), (1, 2), (2, 3), (0, 3)])
    hw = EdgeWeighting(g, {(0, 1): 0, (1, 2): 0, (2, 3): 1, (0, 3): 1})
    assert shortest_path(hw, 0, 3).vertices == (0, 3)


def test_subdivide_single_edge():
    g, provenance = subdivide_edges(path_graph(2), [(0, 1)], 2)
    assert len(g) == 3 and len(g.edges) == 2
    assert provenance[2].edge == (0, 1) and provenance[2].offset == 1


def test_subdivide_with_one_part_is_identity():
    g = cycle_graph(4)
    subdivided, provenance = subdivide_edges(g, g.edges, 1)
    assert subdivided == g
    assert all(provenance[v].vertex == v for v in g.vertex_ids)


def test_subdivide_c4_gives_c8():
    g = cycle_graph(4)
    subdivided, _ = subdivide_edges(g, g.edges, 2)
    assert len(subdivided) == 8 and len(subdivided.edges) == 8
    assert all(len(subdivided.neighbors(v)) == 2 for v in subdivided.vertex_ids)


def test_subdivide_rejects_zero_parts():
    with pytest.raises(InputError):
        subdivide_edges(path_graph(2), [(0, 1)], 0)


def test_contract_single_edge():
    g, quotient = contract_edges(path_graph(2), [(0, 1)])
    assert g.vertex_ids == {0} and quotient == {0: 0, 1: 0}


def test_contract_middle_of_p4():
    g, _ = contract_edges(path_graph(4), [(1, 2)])
    assert len(g) == 3 and len(g.edges) == 2


def test_contract_empty_matching_is_identity(triangle):
    g, quotient = contract_edges(triangle, [])
    assert g == triangle and all(quotient[v] == v for v in triangle.vertex_ids)


def test_contract_rejects_non_matching():
    with pytest.raises(InputError):
        contract_edges(path_graph(3), [(0, 1), (1, 2)])


def test_diameter():
    assert diameter(path_graph(5)) == 4
    assert diameter(path_graph(1)) == 0
    assert diameter(Graph.build(range(2))) == INFINITE


def test_parallel_distance_table_matches_sequential(monkeypatch):
    g = cycle_graph(9)
    sequential = distance_table(g)
    monkeypatch.setattr(settings, "THREADS", 4)
    parallel = distance_table(g)
    assert all(sequential.row(s) == parallel.row(s) for s in g.sorted_vertices)


def test_materialize_reproduces_weighted_distances():
    g = Graph.build(range(5), [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
    hw = EdgeWeighting(g, {(0, 1): 0, (1, 2): 3, (2, 3): 1, (3, 4): 2, (0, 4): 4})
    unweighted, quotient = materialize(hw)
    assert quotient[1] == 0
    assert dist(unweighted, quotient[0], quotient[3]) == wdist(hw, 0, 3) == 4


def test_dot_export_labels_weights():
    text = to_dot(EdgeWeighting(path_graph(2), {(0, 1): 9}))
    assert '0 -- 1 [label="9"];' in text


@given(connected_graphs())
def test_triangle_inequality(g):
    table = distance_table(g)
    for u in g.vertex_ids:
        for v in g.vertex_ids:
            assert table[u, v] == table[v, u]
            for x in g.vertex_ids:
                assert table[u, v] <= table[u, x] + table[x, v]


@given(st.data())
def test_weighted_triangle_inequality(data):
    g = data.draw(connected_graphs(max_vertices=6))
    hw = EdgeWeighting(g, data.draw(weightings(g)))
    table = distance_table(hw)
    for u in g.vertex_ids:
        for v in g.vertex_ids:
            for x in g.vertex_ids:
                assert table[u, v] <= table[u, x] + table[x, v]


@given(graphs())
def test_unit_weights_give_hop_distances(g):
    weighted, plain = distance_table(EdgeWeighting.unit(g)), distance_table(g)
    for u in g.vertex_ids:
        for v in g.vertex_ids:
            assert weighted[u, v] == plain[u, v]


@hypothesis_settings(max_examples=50)
@given(st.data())
def test_shortest_paths_are_geodesics(data):
    g = data.draw(connected_graphs(min_vertices=2))
    hw = EdgeWeighting(g, data.draw(weightings(g)))
    u = data.draw(st.sampled_from(g.sorted_vertices))
    v = data.draw(st.sampled_from(g.sorted_vertices))
    path = shortest_path(hw, u, v)
    assert path.weight(hw) == wdist(hw, u, v)
    assert is_w_geodesic(hw, path)


@given(st.integers(min_value=2, max_value=8), st.integers(min_value=1, max_value=4))
def test_subdividing_a_path_scales_distances(n, parts):
    g = path_graph(n)
    subdivided, _ = subdivide_edges(g, g.edges, parts)
    assert all(dist(subdivided, 0, v) == parts * v for v in range(n))


@given(st.data())
def test_contraction_never_increases_distances(data):
    g = data.draw(graphs(min_vertices=2))
    matching, used = [], set()
    for u, v in data.draw(st.permutations(sorted(g.edges))):
        if u not in used and v not in used and data.draw(st.booleans()):
            matching.append((u, v))
            used.update((u, v))
    contracted, quotient = contract_edges(g, matching)
    before, after = distance_table(g), distance_table(contracted)
    for u in g.vertex_ids:
        for v in g.vertex_ids:
            assert after[quotient[u], quotient[v]] <= before[u, v]
