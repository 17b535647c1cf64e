import numpy as np
import pytest
from hypothesis import given, settings

from homforge.failure_taxonomy import PreconditionError, ResourceCapError
from homforge.graph_core import (
    Graph,
    WeightedGraph,
    blowup,
    complete_bipartite_graph,
    complete_graph,
    cycle_graph,
    edgeless_graph,
    path_graph,
)
from homforge.regularity import (
    EquiPartition,
    fk_partition,
    hom_density,
    reduced_graph,
    step_function,
)
from homforge.types import DensityMode
from strategies import graphs


def test_edge_density_of_c4():
    estimate = hom_density(complete_graph(2), WeightedGraph.from_graph(cycle_graph(4)))
    assert estimate.exact
    assert estimate.value == pytest.approx(0.5)


def test_triangle_density_of_k3():
    value = hom_density(complete_graph(3), WeightedGraph.from_graph(complete_graph(3))).value
    assert value == pytest.approx(6 / 27)


def test_density_counts_isolated_pattern_vertices():
    w = WeightedGraph.from_graph(cycle_graph(4))
    pattern = edgeless_graph(2)
    assert hom_density(pattern, w).value == pytest.approx(1.0)
    assert hom_density(edgeless_graph(0), w).value == 1.0


def test_weighted_density():
    w = WeightedGraph(np.full((2, 2), 0.5))
    assert hom_density(path_graph(3), w).value == pytest.approx(0.25)


def test_monte_carlo_density_needs_seed_and_is_close():
    w = WeightedGraph.from_graph(cycle_graph(4))
    with pytest.raises(PreconditionError):
        hom_density(complete_graph(2), w, DensityMode.MC)
    estimate = hom_density(complete_graph(2), w, DensityMode.MC, samples=20_000, seed=3)
    assert not estimate.exact
    assert abs(estimate.value - 0.5) < 6 * estimate.std_error + 1e-9


def test_exact_density_cap():
    w = WeightedGraph.from_graph(cycle_graph(10))
    with pytest.raises(ResourceCapError) as excinfo:
        hom_density(path_graph(4), w, exact_limit=100)
    assert excinfo.value.code == "CAP_DENSITY_ENUMERATION"
    fallback = hom_density(path_graph(4), w, exact_limit=100, allow_mc=True, seed=1)
    assert not fallback.exact


def test_equipartition_validation():
    p = EquiPartition.from_order([4, 0, 3, 1, 2], 2)
    assert p.parts == ((0, 3, 4), (1, 2))
    assert p.part_of == (0, 1, 1, 0, 0)
    assert p.projection().image == p.part_of
    with pytest.raises(PreconditionError):
        EquiPartition(((0, 1, 2), (3,)))
    with pytest.raises(PreconditionError):
        EquiPartition(((0, 1), (1, 2)))


def test_reduced_graph_of_bipartition():
    g = complete_bipartite_graph(4, 4)
    p = EquiPartition(((0, 1, 2, 3), (4, 5, 6, 7)))
    reduced = reduced_graph(g, p)
    assert reduced.weight(0, 1) == pytest.approx(1.0)
    assert reduced.weight(0, 0) == pytest.approx(0.0)
    spread = step_function(g, p)
    assert np.allclose(spread.weights, g.adjacency_matrix())


def test_fk_partition_finds_the_bipartition():
    g = complete_bipartite_graph(4, 4)
    result = fk_partition(g, 2, test_family=(complete_graph(2),))
    assert sorted(result.partition.parts) == [(0, 1, 2, 3), (4, 5, 6, 7)]
    assert result.converged
    assert result.discrepancy == pytest.approx(0.0, abs=1e-9)
    (check,) = result.checks
    assert (check.pattern_vertices, check.pattern_edges) == (2, 1)
    assert check.density_graph == pytest.approx(0.5)
    assert check.density_partition == pytest.approx(0.5)
    assert check.holds


def test_fk_partition_preconditions():
    with pytest.raises(PreconditionError):
        fk_partition(cycle_graph(5), 0)
    with pytest.raises(PreconditionError):
        fk_partition(cycle_graph(5), 6)
    big = blowup(cycle_graph(5), [5] * 5)
    with pytest.raises(PreconditionError) as excinfo:
        fk_partition(big, 5)
    assert excinfo.value.code == "SEED_REQUIRED"


def test_fk_partition_on_blowup_is_seeded_and_equitable():
    big = blowup(cycle_graph(5), [5] * 5)
    first = fk_partition(big, 5, seed=4)
    second = fk_partition(big, 5, seed=4)
    assert first.partition == second.partition
    sizes = [len(part) for part in first.partition.parts]
    assert max(sizes) - min(sizes) <= 1


def test_fk_partition_into_singletons_reports_zero_discrepancy():
    pairs = [(0, 1), (0, 2), (1, 3), (1, 6), (2, 5), (3, 4), (4, 7), (5, 6), (6, 7)]
    g = Graph.from_edges(8, pairs)
    result = fk_partition(g, 8)
    assert all(len(part) == 1 for part in result.partition.parts)
    assert result.discrepancy == pytest.approx(0.0, abs=1e-9)
    assert result.converged


@given(graphs(min_n=1, max_n=8))
@settings(max_examples=60, deadline=None)
def test_fk_partition_with_one_part_per_vertex_is_exact(g):
    result = fk_partition(g, g.n)
    assert result.partition.M == g.n
    assert result.discrepancy == pytest.approx(0.0, abs=1e-9)
    assert result.converged
