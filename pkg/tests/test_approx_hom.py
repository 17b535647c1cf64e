import pytest

from homforge.approx_hom import (
    lift_subdivision_witness,
    max_hom_free_subgraph,
    prop18_pipeline,
    pullout,
    pullout_domination_route,
    thm110_pipeline,
    verify_approx_hom,
    verify_pullout,
)
from homforge.failure_taxonomy import PreconditionError, ResourceCapError
from homforge.graph_core import (
    VertexMap,
    blowup,
    complete_bipartite_graph,
    complete_graph,
    count_violations,
    cycle_graph,
    edgeless_graph,
    is_hom_free,
    odd_girth_up_to,
)
from homforge.types import HomFreeness, SubgraphMode


def test_max_triangle_free_subgraph_of_k4():
    k4 = complete_graph(4)
    best = max_hom_free_subgraph(k4, complete_graph(3))
    assert best.edge_count == 4
    assert is_hom_free(best, complete_graph(3)) is HomFreeness.FREE
    greedy = max_hom_free_subgraph(k4, complete_graph(3), SubgraphMode.GREEDY)
    assert greedy.edge_count <= 4
    assert is_hom_free(greedy, complete_graph(3)) is HomFreeness.FREE


def test_max_hom_free_subgraph_limits():
    with pytest.raises(PreconditionError) as excinfo:
        max_hom_free_subgraph(complete_graph(3), edgeless_graph(2))
    assert excinfo.value.code == "NOT_REMOVABLE"
    with pytest.raises(ResourceCapError) as excinfo:
        max_hom_free_subgraph(complete_graph(7), complete_graph(3))
    assert excinfo.value.code == "CAP_EXACT_SUBGRAPH"


def test_verify_approx_hom_counts_against_threshold():
    k3, k2 = complete_graph(3), complete_graph(2)
    report = verify_approx_hom(k3, k2, VertexMap(3, 2, (0, 1, 0)), 1 / 9, k3)
    assert report.violations == 1
    assert report.passed
    assert report.pattern_freeness == HomFreeness.FREE.value
    strict = verify_approx_hom(k3, k2, VertexMap(3, 2, (0, 1, 0)), 0.1, k3)
    assert not strict.passed
    with pytest.raises(PreconditionError):
        verify_approx_hom(k3, k2, VertexMap.identity(2), 0.5, k3)


def test_regularity_route_on_complete_bipartite_graph():
    g = complete_bipartite_graph(4, 4)
    tri = complete_graph(3)
    result = prop18_pipeline(g, tri, tri, 0.2, m_override=2)
    assert result.target == complete_graph(2)
    assert result.report.violations == 0
    assert result.report.passed
    assert result.report.parts == 2
    assert count_violations(result.map, g, result.target) == 0


def test_regularity_route_on_balanced_c5_blowup():
    g = blowup(cycle_graph(5), [4] * 5)
    tri = complete_graph(3)
    result = prop18_pipeline(g, tri, tri, 0.2, m_override=5, seed=3)
    report = result.report
    assert report.parts == 5
    assert report.within_part + report.low_density + report.deleted_pairs == report.violations
    assert report.pattern_freeness == HomFreeness.FREE.value
    assert report.violations == 0
    assert report.passed
    independent = verify_approx_hom(g, result.target, result.map, 0.2, tri)
    assert independent.violations == report.violations
    assert independent.passed
    assert independent.pattern_freeness == HomFreeness.FREE.value


def test_regularity_route_rejects_host_containing_h():
    g = blowup(cycle_graph(5), [2] * 5)
    with pytest.raises(PreconditionError) as excinfo:
        prop18_pipeline(g, complete_graph(3), cycle_graph(5), 0.2, m_override=5)
    assert excinfo.value.code == "NOT_HOM_FREE"


def test_regularity_route_validates_parameters():
    g = complete_bipartite_graph(2, 2)
    tri = complete_graph(3)
    with pytest.raises(PreconditionError):
        prop18_pipeline(g, tri, tri, 0.0)
    with pytest.raises(PreconditionError):
        prop18_pipeline(g, tri, tri, 0.5, m_override=9)
    with pytest.raises(PreconditionError):
        prop18_pipeline(g, tri, tri, 0.5, delta_value=2.0)


def test_regularity_route_flags_missing_delta():
    g = complete_bipartite_graph(3, 3)
    tri = complete_graph(3)
    default = prop18_pipeline(g, tri, tri, 0.5).report
    assert default.parts == g.n
    assert "with delta = 1" in default.k_expr
    assert any("delta(eps/2) not given" in w for w in default.warnings)
    supplied = prop18_pipeline(g, tri, tri, 0.5, delta_value=0.5).report
    assert not any("delta(eps/2)" in w for w in supplied.warnings)
    assert supplied.k_expr.endswith(f" = {5 * 3 * 4**3 / 0.5:.6g}")


def test_pullout_on_k66():
    g = complete_bipartite_graph(6, 6)
    dec = pullout(g, 0.4)
    assert dec.set_size == 2
    assert dec.centers == (0, 8, 2)
    assert dec.sets == ((6, 7), (0, 1), (8, 9))
    assert verify_pullout(g, dec) == []


def test_pullout_stops_immediately_on_sparse_input():
    dec = pullout(cycle_graph(10), 0.5)
    assert dec.k == 0
    assert dec.leftover == frozenset(range(10))


def test_pullout_route_on_k66():
    g = complete_bipartite_graph(6, 6)
    result = thm110_pipeline(g, complete_graph(3), 0.4)
    assert result.target.n == 4
    assert result.target.edge_count == 2
    assert result.report.violations == 28
    assert result.report.incident_to_leftover == 28
    assert result.report.passed


def test_pullout_route_on_c11_blowup():
    g = blowup(cycle_graph(11), [5] * 11)
    result = thm110_pipeline(g, complete_graph(3), 0.2)
    assert result.target.n <= 16
    assert odd_girth_up_to(result.target, 3) is None
    assert result.report.passed


def test_pullout_route_rejects_short_odd_cycles():
    with pytest.raises(PreconditionError) as excinfo:
        thm110_pipeline(cycle_graph(9), complete_graph(3), 0.5)
    assert excinfo.value.code == "NOT_HOM_FREE"


def test_lift_subdivision_witness():
    g = complete_bipartite_graph(6, 6)
    dec = pullout(g, 0.4)
    lifted = lift_subdivision_witness(g, dec, complete_graph(2), VertexMap(2, 4, (1, 2)))
    assert lifted.image == (0, 8, 6, 0)


def test_pullout_domination_route_on_k66():
    g = complete_bipartite_graph(6, 6)
    result = pullout_domination_route(g, 0.4)
    assert result.decomposition is not None and result.decomposition.k == 3
    assert result.target.n == 11
    assert result.report.within_sets == 0
    assert result.report.passed
    assert result.report.pattern_freeness == HomFreeness.FREE.value
