import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from homforge.failure_taxonomy import PreconditionError
from homforge.graph_core import (
    Graph,
    VertexMap,
    complete_graph,
    count_violations,
    cycle_graph,
    odd_girth,
)
from homforge.mycielski import ROOT, extend_homomorphism, mycielskian_size, t_fold_mycielskian
from strategies import graphs, layered_graphs


def _alternating(n: int) -> VertexMap:
    return VertexMap(n, 2, tuple(i % 2 for i in range(n)))


def test_two_fold_mycielskian_of_c7():
    m = t_fold_mycielskian(cycle_graph(7), 2)
    assert m.graph.n == 22
    assert m.graph.edge_count == 5 * 7 + 7
    assert odd_girth(m.graph) == 7
    assert m.root == 21
    assert m.label(m.root) == ROOT
    assert m.label(m.vertex_id(3, 2)).render() == "3 2"


def test_mycielskian_of_k2_is_c5():
    m = t_fold_mycielskian(complete_graph(2), 1)
    assert m.graph.n == 5
    assert m.graph.edge_count == 5
    assert odd_girth(m.graph) == 5


def test_mycielskian_rejects_bad_t_and_layer():
    with pytest.raises(PreconditionError):
        t_fold_mycielskian(cycle_graph(5), 0)
    m = t_fold_mycielskian(cycle_graph(5), 1)
    with pytest.raises(PreconditionError):
        m.vertex_id(0, 3)


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=6))
def test_mycielskian_size_prediction(g: Graph):
    for t in (1, 2):
        m = t_fold_mycielskian(g, t)
        assert mycielskian_size(g.n, g.edge_count, t) == (m.graph.n, m.graph.edge_count)


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=6))
def test_mycielskian_keeps_long_odd_girth(g: Graph):
    base = odd_girth(g)
    for t in (1, 2):
        if base is None or base >= 2 * t + 3:
            lifted = odd_girth(t_fold_mycielskian(g, t).graph)
            assert lifted is None or lifted >= 2 * t + 3


def test_extend_homomorphism_from_a_path_into_k2():
    g = cycle_graph(9)
    u_set = range(1, 9)
    psi, target = extend_homomorphism(g, u_set, _alternating(8), 2, complete_graph(2))
    assert count_violations(psi, g, target.graph) == 0
    assert psi(0) == target.root
    assert target.label(psi(1)).layer == 1
    assert target.label(psi(4)).layer == 3


def test_extend_homomorphism_rejects_dependent_layers():
    with pytest.raises(PreconditionError) as excinfo:
        extend_homomorphism(cycle_graph(5), range(1, 5), _alternating(4), 2, complete_graph(2))
    assert excinfo.value.code == "LAYER_NOT_INDEPENDENT"


def test_extend_homomorphism_rejects_non_homomorphic_phi():
    with pytest.raises(PreconditionError) as excinfo:
        extend_homomorphism(
            cycle_graph(9), range(1, 9), VertexMap.constant(8, 2), 1, complete_graph(2)
        )
    assert excinfo.value.code == "PHI_NOT_HOMOMORPHISM"


def test_extend_homomorphism_checks_dimensions():
    with pytest.raises(PreconditionError) as excinfo:
        extend_homomorphism(cycle_graph(9), range(1, 9), _alternating(7), 1, complete_graph(2))
    assert excinfo.value.code == "DIMENSION_MISMATCH"


def _identity_into_clique(g: Graph, layers: list[list[int]]) -> tuple[list[int], VertexMap]:
    u_set = [v for v in range(g.n) if v not in layers[0]]
    return u_set, VertexMap(len(u_set), len(u_set), tuple(range(len(u_set))))


@settings(max_examples=150, deadline=None)
@given(layered_graphs())
def test_extend_homomorphism_on_independent_layers(sample):
    g, layers = sample
    t = len(layers) - 1
    u_set, phi = _identity_into_clique(g, layers)
    psi, target = extend_homomorphism(g, u_set, phi, t, complete_graph(len(u_set)))
    assert count_violations(psi, g, target.graph) == 0
    layer_of = {v: depth for depth, layer in enumerate(layers) for v in layer}
    for v in range(g.n):
        if layer_of.get(v) == 0:
            assert psi(v) == target.root
        else:
            assert target.label(psi(v)).layer == layer_of.get(v, t + 1)


@settings(max_examples=150, deadline=None)
@given(layered_graphs(), st.data())
def test_extend_homomorphism_rejects_an_edge_inside_a_layer(sample, data):
    g, layers = sample
    crowded = [layer for layer in layers if len(layer) >= 2]
    assume(crowded)
    layer = data.draw(st.sampled_from(crowded))
    a, b = data.draw(st.lists(st.sampled_from(layer), min_size=2, max_size=2, unique=True))
    planted = Graph.from_edges(g.n, [*g.sorted_edges, (a, b)])
    u_set, phi = _identity_into_clique(planted, layers)
    with pytest.raises(PreconditionError) as excinfo:
        extend_homomorphism(planted, u_set, phi, len(layers) - 1, complete_graph(len(u_set)))
    assert excinfo.value.code == "LAYER_NOT_INDEPENDENT"
