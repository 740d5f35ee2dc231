import pytest
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st

from qirw.core.exceptions import InputError
from qirw.models.decomposition import PathDecomposition
from qirw.models.graph import EdgeWeighting, Graph
from qirw.models.quasi_isometry import INFEASIBLE, QIParams, VertexMap
from qirw.services.graph_core import distance_table, path_graph, star_graph, wdist
from qirw.services.path_decomposition import canonical_path_decomposition, exact_pathwidth, is_valid
from qirw.services.quasi_isometry import (
    check_qi,
    compose_qi,
    contraction_map,
    materialize_map,
    measure_params,
    minimal_additive,
    pull_back_weights,
    subdivision_map,
    surjectivize,
)

from tests.strategies import connected_graphs, identity


def test_identity_is_a_1_0_quasi_isometry(triangle):
    assert check_qi(identity(triangle), QIParams(1, 0)) is None


def test_subdivided_cycle_needs_additive_one(c12_to_c6):
    assert check_qi(c12_to_c6, QIParams(2, 1)) is None
    violation = check_qi(c12_to_c6, QIParams(2, 0))
    assert violation is not None
    u, v = violation.witnesses
    # one end of the witness pair is a subdivision vertex, the other an original
    assert (u < 6) != (v < 6)


def test_p4_onto_p2(p4_to_p2):
    assert check_qi(p4_to_p2, QIParams(1, 2)) is None


def test_preimage_selector_picks_the_smallest_preimage(p4_to_p2):
    assert dict(p4_to_p2.preimage_selector()) == {0: 0, 1: 2}
    phi = VertexMap(path_graph(4), path_graph(3), {0: 1, 1: 1, 2: 0, 3: 0})
    assert dict(phi.preimage_selector()) == {1: 0, 0: 2}


def test_coverage_bullet_names_the_uncovered_vertex():
    phi = VertexMap(path_graph(1), path_graph(4), {0: 0})
    violation = check_qi(phi, QIParams(1, 2))
    assert violation.bullet == 3 and violation.witnesses == (3,)


def test_minimal_additive_of_identity_is_zero():
    g = path_graph(5)
    assert minimal_additive(VertexMap(g, EdgeWeighting.unit(g), {v: v for v in g.vertex_ids})) == 0


def test_minimal_additive_p4_onto_unit_edge(p4_to_p2):
    assert minimal_additive(p4_to_p2.onto(EdgeWeighting.unit(p4_to_p2.target_graph))) == 2


def test_minimal_additive_p4_onto_heavy_edge(p4_to_p2):
    assert minimal_additive(p4_to_p2.onto(EdgeWeighting(p4_to_p2.target_graph, {(0, 1): 3}))) == 2


def test_minimal_additive_detects_mixed_finiteness():
    g = Graph.build(range(2))
    phi = VertexMap(g, path_graph(2), {0: 0, 1: 1})
    assert minimal_additive(phi) is INFEASIBLE
    assert measure_params(phi) is INFEASIBLE


def test_measure_params_small_maps(p4_to_p2, triangle):
    assert measure_params(identity(triangle)) == 1
    assert measure_params(p4_to_p2) == 2


def test_contraction_map_is_a_1_1_quasi_isometry():
    phi = contraction_map(path_graph(6), [(1, 2)])
    assert check_qi(phi, QIParams(1, 1)) is None
    assert check_qi(phi, QIParams(1, 0)) is not None


def test_surjectivize_keeps_surjective_maps(p4_to_p2):
    reduction = surjectivize(p4_to_p2, 2, canonical_path_decomposition(2))
    assert reduction.h1 == p4_to_p2.target
    assert reduction.assignment.is_trivial()
    assert dict(reduction.phi1.image) == dict(p4_to_p2.image)


def test_surjectivize_assigns_ties_to_the_lower_id():
    phi = VertexMap(path_graph(2), path_graph(3), {0: 0, 1: 2})
    reduction = surjectivize(phi, 1, canonical_path_decomposition(3))
    assert reduction.assignment.owner[1] == 0
    assert reduction.h1 == Graph.build([0, 2], [(0, 2)])
    assert is_valid(reduction.decomposition)


def test_surjectivize_star_onto_its_centre():
    star = star_graph(3)
    phi = VertexMap(path_graph(1), star, {0: 0})
    d = PathDecomposition.build(star, [[0, 1], [0, 2], [0, 3]])
    reduction = surjectivize(phi, 1, d)
    assert reduction.h1 == Graph.build([0])
    assert reduction.decomposition.width == 0


def test_surjectivize_reports_uncovered_vertex():
    phi = VertexMap(path_graph(1), path_graph(3), {0: 0})
    with pytest.raises(InputError) as info:
        surjectivize(phi, 1, canonical_path_decomposition(3))
    assert info.value.data["vertex"] == 2


def test_pull_back_on_trivial_clusters_is_identity(p4_to_p2):
    reduction = surjectivize(p4_to_p2, 2, canonical_path_decomposition(2))
    w1 = EdgeWeighting(reduction.h1, {(0, 1): 4})
    assert dict(pull_back_weights(w1, reduction.assignment).weight) == {(0, 1): 4}


def test_pull_back_zeroes_intra_cluster_edges():
    phi = VertexMap(path_graph(2), path_graph(3), {0: 0, 1: 2})
    reduction = surjectivize(phi, 1, canonical_path_decomposition(3))
    w = pull_back_weights(EdgeWeighting(reduction.h1, {(0, 2): 7}), reduction.assignment)
    assert dict(w.weight) == {(0, 1): 0, (1, 2): 7}
    assert wdist(w, 0, 2) == 7


def test_pull_back_on_star_is_all_zero():
    star = star_graph(3)
    phi = VertexMap(path_graph(1), star, {0: 0})
    reduction = surjectivize(phi, 1, PathDecomposition.build(star, [[0, 1], [0, 2], [0, 3]]))
    w = pull_back_weights(EdgeWeighting.zero(reduction.h1), reduction.assignment)
    assert set(w.weight.values()) == {0}


def test_compose_with_identity(p4_to_p2):
    inner = identity(p4_to_p2.source)
    theta, params = compose_qi(p4_to_p2, QIParams(1, 2), inner, QIParams(1, 0))
    assert params == QIParams(1, 4)
    assert dict(theta.image) == dict(p4_to_p2.image)


def test_compose_isometries():
    g = path_graph(4)
    _, params = compose_qi(identity(g), QIParams(1, 0), identity(g), QIParams(1, 0))
    assert params == QIParams(1, 0)


def test_compose_rejects_mismatched_maps(p4_to_p2, triangle):
    with pytest.raises(InputError):
        compose_qi(p4_to_p2, QIParams(1, 2), identity(triangle), QIParams(1, 0))


def test_compose_contraction_into_subdivision():
    h = path_graph(5)
    outer = subdivision_map(h, 2)
    inner = contraction_map(outer.source, [(0, 5)])
    theta, params = compose_qi(
        outer, QIParams.normal(measure_params(outer)), inner, QIParams.normal(measure_params(inner))
    )
    assert theta.target == h
    assert check_qi(theta, params) is None


@hypothesis_settings(max_examples=30, deadline=None)
@given(connected_graphs(min_vertices=2, max_vertices=6), st.integers(1, 3), st.integers(0, 2))
def test_check_qi_is_monotone(g, parts, extra):
    phi = subdivision_map(g, parts)
    c = measure_params(phi)
    assert check_qi(phi, QIParams.normal(c)) is None
    assert check_qi(phi, QIParams(c - 1 + extra, c + extra)) is None


@hypothesis_settings(max_examples=30, deadline=None)
@given(connected_graphs(min_vertices=2, max_vertices=6))
def test_pull_back_preserves_image_distances(h):
    # map a single source vertex per even id; odd ids are covered by clusters
    image_vertices = [v for v in h.sorted_vertices if v % 2 == 0]
    source = path_graph(len(image_vertices))
    phi = VertexMap(source, h, dict(enumerate(image_vertices)))
    c = max(distance_table(h, image_vertices).rows[image_vertices[0]].values())
    _, d = exact_pathwidth(h)
    reduction = surjectivize(phi, c, d)
    w1 = EdgeWeighting.constant(reduction.h1, 3)
    w = pull_back_weights(w1, reduction.assignment)
    for u in source.vertex_ids:
        for v in source.vertex_ids:
            assert wdist(w, phi(u), phi(v)) == wdist(w1, reduction.phi1(u), reduction.phi1(v))


@hypothesis_settings(max_examples=20, deadline=None)
@given(st.data())
def test_composed_parameters_always_pass(data):
    h = data.draw(connected_graphs(min_vertices=2, max_vertices=5))
    outer = subdivision_map(h, data.draw(st.integers(1, 3)))
    edge = data.draw(st.sampled_from(sorted(outer.source.edges)))
    inner = contraction_map(outer.source, [edge])
    theta, params = compose_qi(
        outer, QIParams.normal(measure_params(outer)), inner, QIParams.normal(measure_params(inner))
    )
    assert check_qi(theta, params) is None


def test_materialized_map_keeps_the_additive_constant(p4_to_p2):
    hw = EdgeWeighting(p4_to_p2.target_graph, {(0, 1): 3})
    mapped = materialize_map(p4_to_p2, hw)
    assert len(mapped.target_graph) == 4
    assert minimal_additive(mapped) == minimal_additive(p4_to_p2.onto(hw)) == 2
