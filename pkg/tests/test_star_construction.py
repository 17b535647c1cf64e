import pytest

from homforge.failure_taxonomy import PreconditionError, ResourceCapError
from homforge.graph_core import (
    bowtie_graph,
    complete_graph,
    count_violations,
    cycle_graph,
    path_graph,
)
from homforge.star_construction import (
    audit_copy_bipartite,
    build_star,
    check_t_star_odd_girth,
    enumerate_f_copies,
    label_copy,
    make_f_forest,
    random_k3_forest,
    star_projection,
)


def _triangle_star(g):
    tri = complete_graph(3)
    return build_star(g, enumerate_f_copies(g, tri).copies, tri)


def test_label_copy_ranks_neighbours():
    copy = label_copy(complete_graph(3), (0, 1, 2), 0)
    assert copy.labels == {(0, 1): (1, 1), (0, 2): (2, 1), (1, 2): (2, 2)}
    with pytest.raises(PreconditionError):
        label_copy(complete_graph(3), (0, 0, 1), 0)


def test_enumerate_copies_of_triangles_in_bowtie():
    enumeration = enumerate_f_copies(bowtie_graph(), complete_graph(3))
    assert len(enumeration.copies) == 2
    assert enumeration.unique_cover
    assert [c.vertices for c in enumeration.copies] == [(0, 1, 2), (0, 3, 4)]


def test_enumerate_copies_reports_multiple_cover():
    enumeration = enumerate_f_copies(complete_graph(4), complete_graph(3))
    assert len(enumeration.copies) == 4
    assert not enumeration.unique_cover
    assert len(enumeration.multiply_covered) == 6


def test_enumerate_copies_requires_connected_pattern():
    with pytest.raises(PreconditionError):
        enumerate_f_copies(cycle_graph(5), complete_graph(1))


def test_triangle_star_is_a_perfect_matching():
    star = _triangle_star(complete_graph(3))
    assert (star.graph.n, star.graph.edge_count) == (6, 3)
    assert all(d == 1 for d in star.graph.degrees)


def test_bowtie_star_size_and_structure():
    star = _triangle_star(bowtie_graph())
    assert (star.graph.n, star.graph.edge_count) == (20, 24)
    assert star.block == 4
    assert audit_copy_bipartite(star) == []
    assert count_violations(star_projection(star), star.graph, star.base) == 0


def test_star_vertex_ids_use_one_based_coordinates():
    star = _triangle_star(bowtie_graph())
    vertex = star.vertex_id(3, (2, 1))
    assert vertex == 3 * 4 + 1
    assert star.base_vertex(vertex) == 3
    assert star.coordinates(vertex) == (2, 1)
    labelling = star.labelling()
    assert labelling.bases[vertex] == 3
    assert tuple(labelling.coords[vertex]) == (2, 1)


def test_star_rejects_non_unique_cover_and_cap():
    tri = complete_graph(3)
    k4 = complete_graph(4)
    with pytest.raises(PreconditionError) as excinfo:
        build_star(k4, enumerate_f_copies(k4, tri).copies, tri)
    assert excinfo.value.code == "UNIQUE_COVER_FAILED"
    with pytest.raises(ResourceCapError) as excinfo:
        build_star(bowtie_graph(), enumerate_f_copies(bowtie_graph(), tri).copies, tri, 10)
    assert excinfo.value.code == "CAP_STAR_SIZE"


def test_path_star_uses_max_degree_labels():
    p3 = path_graph(3)
    star = build_star(p3, enumerate_f_copies(p3, p3).copies, p3)
    assert star.delta == 2 and star.m == 1
    assert star.graph.n == 6
    assert star.graph.edge_count == 2


def test_k3_forest_plan():
    forest = make_f_forest(complete_graph(3), [0, 1, 1])
    assert forest.graph.n == 9
    assert forest.graph.edge_count == 12
    assert forest.hosts == (0, 1, 1)
    assert enumerate_f_copies(forest.graph, forest.f).unique_cover


def test_forest_plan_validation():
    with pytest.raises(PreconditionError):
        make_f_forest(complete_graph(3), [5])
    with pytest.raises(PreconditionError) as excinfo:
        make_f_forest(complete_graph(3), [None])
    assert excinfo.value.code == "SEED_REQUIRED"


def test_random_k3_forest_is_seeded():
    first = random_k3_forest(4, seed=9)
    assert first == random_k3_forest(4, seed=9)
    assert first.graph.n == 9


def test_triangle_forest_stars_have_no_short_odd_cycles():
    for plan in ([], [0], [0, 1, 1], [2, 4, 0]):
        forest = make_f_forest(complete_graph(3), plan)
        og = check_t_star_odd_girth(forest)
        assert og is None or og >= 9
    with pytest.raises(PreconditionError):
        check_t_star_odd_girth(make_f_forest(path_graph(3), [0]))
