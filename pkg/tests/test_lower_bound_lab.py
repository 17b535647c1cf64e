import math

import numpy as np
import pytest
from hypothesis import given, settings

from homforge.failure_taxonomy import PreconditionError, ResourceCapError
from homforge.graph_core import (
    Graph,
    VertexMap,
    bowtie_graph,
    complete_graph,
    count_violations,
    cycle_graph,
    edgeless_graph,
    girth,
    path_graph,
)
from homforge.lower_bound_lab import (
    bad_edge_accounting,
    binary_entropy,
    entropy_diagnostics,
    h_inverse,
    lemma41_bound,
    min_outcome_check,
    min_violation_map,
    prop51_witness,
    thm113_witness,
)
from homforge.star_construction import (
    StarLabelling,
    build_star,
    enumerate_f_copies,
    star_projection,
)
from homforge.types import Caps, DensityMode, HomFreeness
from strategies import graphs


def _triangle_star(g):
    tri = complete_graph(3)
    return build_star(g, enumerate_f_copies(g, tri).copies, tri)


def test_binary_entropy_and_inverse():
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.0) == 0.0
    assert h_inverse(1.0) == 0.5
    assert h_inverse(0.0) == 0.0
    assert h_inverse(binary_entropy(0.11)) == pytest.approx(0.11, abs=1e-12)
    grid = np.linspace(0.0, 1.0, 101)
    assert np.max(np.abs(binary_entropy(h_inverse(grid)) - grid)) <= 1e-12
    with pytest.raises(PreconditionError):
        h_inverse(1.5)


def test_outcome_bound():
    assert lemma41_bound(2, 0.0) == 0.5
    assert lemma41_bound(4, 1.0) == 0.0
    with pytest.raises(PreconditionError):
        lemma41_bound(1, 0.1)


def test_min_outcome_check():
    uniform = min_outcome_check([0.25] * 4, 0.1)
    assert uniform.applicable and uniform.holds
    assert uniform.entropy == pytest.approx(2.0)
    skewed = min_outcome_check([0.9, 0.1], 0.05)
    assert not skewed.applicable and skewed.holds
    with pytest.raises(PreconditionError):
        min_outcome_check([0.5, 0.6], 0.1)
    with pytest.raises(PreconditionError):
        min_outcome_check([1.0], 0.1)


def test_entropy_of_identity_map_on_bowtie_star():
    star = _triangle_star(bowtie_graph())
    phi = VertexMap.identity(star.graph.n)
    report = entropy_diagnostics(star.labelling(), phi, copies=star.copies)
    assert report.summary.base_vertices == 5
    assert report.summary.total_information == pytest.approx(10.0)
    assert report.summary.identity_ok and report.summary.superadditivity_ok
    for row in report.vertices:
        assert row.entropy == pytest.approx(2.0)
        assert row.coordinate_information == pytest.approx((1.0, 1.0))
    assert report.copy_information == pytest.approx((3.0, 3.0))


def test_entropy_of_constant_and_coordinate_maps():
    star = _triangle_star(bowtie_graph())
    labelling = star.labelling()
    constant = entropy_diagnostics(labelling, VertexMap.constant(star.graph.n, 1))
    assert constant.summary.total_information == pytest.approx(0.0)
    first = VertexMap(star.graph.n, 3, tuple(int(c) for c in labelling.coords[:, 0]))
    report = entropy_diagnostics(labelling, first)
    for row in report.vertices:
        assert row.coordinate_information == pytest.approx((1.0, 0.0))


def test_entropy_caps_and_sampling():
    star = _triangle_star(bowtie_graph())
    labelling = star.labelling()
    phi = VertexMap.identity(star.graph.n)
    with pytest.raises(ResourceCapError) as excinfo:
        entropy_diagnostics(labelling, phi, exact_limit=2)
    assert excinfo.value.code == "CAP_ENTROPY_ENUMERATION"
    with pytest.raises(PreconditionError):
        entropy_diagnostics(labelling, phi, exact_limit=2, allow_mc=True)
    sampled = entropy_diagnostics(
        labelling, phi, exact_limit=2, allow_mc=True, seed=5, samples=4000
    )
    assert sampled.summary.mode == DensityMode.MC.value
    with pytest.raises(PreconditionError):
        entropy_diagnostics(labelling, VertexMap.identity(3))


def test_entropy_rejects_incomplete_label_classes():
    labelling = StarLabelling(2, 1, np.array([0, 0]), np.array([[1], [1]]))
    with pytest.raises(PreconditionError) as excinfo:
        entropy_diagnostics(labelling, VertexMap.identity(2))
    assert excinfo.value.code == "INVALID_LABEL"


def test_bad_edge_accounting():
    star = _triangle_star(complete_graph(3))
    tri = complete_graph(3)
    clean = bad_edge_accounting(star, star_projection(star), tri)
    assert clean.total == 0
    constant = bad_edge_accounting(star, VertexMap.constant(star.graph.n, 3), tri)
    assert constant.total == 3
    assert constant.per_copy == (3,)
    assert [count.fraction for count in constant.per_edge] == [0.25, 0.25, 0.25]
    assert constant.class_sizes[1] == {0: 2}


def test_min_violation_small_cases():
    k2 = complete_graph(2)
    result = min_violation_map(complete_graph(3), k2)
    assert result.violations == 1
    assert result.map.image == (0, 0, 1)
    assert min_violation_map(cycle_graph(5), k2).violations == 1
    assert min_violation_map(cycle_graph(6), k2).violations == 0
    assert min_violation_map(cycle_graph(5), k2, cap=0).violations == 1


def test_min_violation_edge_cases():
    trivial = min_violation_map(edgeless_graph(0), complete_graph(2))
    assert trivial.method == "trivial" and trivial.violations == 0
    with pytest.raises(PreconditionError) as excinfo:
        min_violation_map(path_graph(2), edgeless_graph(0))
    assert excinfo.value.code == "NOT_MAPPABLE"
    with pytest.raises(ResourceCapError) as excinfo:
        min_violation_map(cycle_graph(5), complete_graph(2), cap=10, method="brute-force")
    assert excinfo.value.code == "CAP_MIN_VIOLATION"
    with pytest.raises(ResourceCapError) as excinfo:
        min_violation_map(complete_graph(3), complete_graph(2), cap=0, node_budget=1)
    assert excinfo.value.code == "BUDGET_MIN_VIOLATION"


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=6), graphs(min_n=1, max_n=3))
def test_branch_and_bound_matches_brute_force(g: Graph, gamma: Graph):
    brute = min_violation_map(g, gamma, method="brute-force")
    bnb = min_violation_map(g, gamma, cap=0)
    assert brute.violations == bnb.violations
    assert count_violations(bnb.map, g, gamma) == bnb.violations


def test_edge_decoration_witness_needs_two_connected_pattern():
    with pytest.raises(PreconditionError) as excinfo:
        thm113_witness(path_graph(3), cycle_graph(5), 0.1, seed=1)
    assert excinfo.value.code == "NOT_2_CONNECTED"
    with pytest.raises(PreconditionError):
        thm113_witness(complete_graph(3), cycle_graph(5), 0.0, seed=1)


def test_edge_decoration_witness_bundle():
    caps = Caps(mvm_cap=1, mvm_node_budget=10)
    bundle = thm113_witness(
        complete_graph(3), cycle_graph(5), 1 / 24, seed=1, caps=caps, n=24,
        candidates=[complete_graph(2)],
    )
    report = bundle.report
    assert report.unique_cover and report.berge_girth_ok
    assert report.hyperedges_used <= caps.witness_max_copies
    assert report.star_vertices == 24 * 2**report.hyperedges_used
    assert report.pattern_freeness == HomFreeness.FREE.value
    assert report.star_odd_girth is None or report.star_odd_girth >= 7
    assert report.candidate_minimum == ["candidate 0: declined (BUDGET_MIN_VIOLATION)"]
    assert bundle.output_graph is bundle.star.graph


def test_edge_decoration_witness_compares_with_the_pulled_back_base_map():
    k2 = complete_graph(2)
    bundle = thm113_witness(
        complete_graph(3), cycle_graph(5), 1 / 6, seed=1, caps=Caps(witness_max_copies=1),
        n=6, c=100.0, candidates=[k2],
    )
    star = bundle.star
    assert star is not None and star.m == 1
    base = min_violation_map(star.base, k2)
    assert base.violations == 1
    pulled = count_violations(star_projection(star).then(base.map), star.graph, k2)
    (line,) = bundle.report.candidate_minimum
    assert line.endswith(f", base map pulled back {pulled}")
    assert min_violation_map(star.graph, k2).violations <= pulled


def test_random_graph_witness():
    bundle = prop51_witness(complete_graph(3), cycle_graph(5), 0.05, seed=2)
    cycle_length = girth(bundle.graph)
    assert cycle_length is None or cycle_length > 5
    assert bundle.graph.n * 2 >= 20
    assert bundle.report.pattern_freeness == HomFreeness.FREE.value
    assert bundle.output_graph is bundle.graph
    with pytest.raises(PreconditionError) as excinfo:
        prop51_witness(complete_graph(3), cycle_graph(4), 0.05, seed=2)
    assert excinfo.value.code == "PRECONDITION_BIPARTITE"
    assert math.isclose(bundle.report.eps, 0.05)
