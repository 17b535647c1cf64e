"""Label-tuple blowups of F-decorated graphs and the F-forests they are tested on.

A graph whose edges are covered by unique copies of F is blown up by tuples in
{1..Δ}^m, one coordinate per copy, so that every copy turns into a disjoint union of
complete bipartite graphs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import GraphMatcher

from homforge.failure_taxonomy import PreconditionError, ResourceCapError
from homforge.graph_core import Graph, VertexMap, _edge, complete_graph, odd_girth

logger = logging.getLogger(__name__)

DEFAULT_STAR_CAP = 1_000_000


@dataclass(frozen=True)
class LabelledCopy:
    """Copy ``index`` of F with F-vertex i placed on host vertex ``vertices[i]``.

    ``edge_labels`` holds, per host edge (u, v) with u < v, the labels at u and at v.
    """

    index: int
    vertices: tuple[int, ...]
    edge_labels: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    @cached_property
    def labels(self) -> dict[tuple[int, int], tuple[int, int]]:
        return dict(self.edge_labels)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(edge for edge, _ in self.edge_labels)


def label_copy(f: Graph, vertices: Sequence[int], index: int) -> LabelledCopy:
    """Incident edges of each F-vertex are labelled 1..deg in order of the other endpoint."""
    if len(vertices) != f.n or len(set(vertices)) != f.n:
        raise PreconditionError(f"INVALID_COPY: {list(vertices)} is not an injective F placement")
    rank = {
        (a, b): position + 1
        for a in range(f.n)
        for position, b in enumerate(sorted(f.neighbors(a)))
    }
    entries = []
    for a, b in f.sorted_edges:
        u, v = vertices[a], vertices[b]
        if u < v:
            entries.append(((u, v), (rank[(a, b)], rank[(b, a)])))
        else:
            entries.append(((v, u), (rank[(b, a)], rank[(a, b)])))
    return LabelledCopy(index, tuple(vertices), tuple(sorted(entries)))


@dataclass(frozen=True)
class CopyEnumeration:
    copies: tuple[LabelledCopy, ...]
    unique_cover: bool
    uncovered: tuple[tuple[int, int], ...]
    multiply_covered: tuple[tuple[int, int], ...]


def enumerate_f_copies(g: Graph, f: Graph) -> CopyEnumeration:
    if f.n < 2 or not nx.is_connected(f.to_networkx()):
        raise PreconditionError("PRECONDITION_PATTERN: F must be connected on at least 2 vertices")
    matcher = GraphMatcher(g.to_networkx(), f.to_networkx())
    least: dict[frozenset[tuple[int, int]], tuple[int, ...]] = {}
    for mono in matcher.subgraph_monomorphisms_iter():
        placement = [0] * f.n
        for host, pattern in mono.items():
            placement[pattern] = host
        tup = tuple(placement)
        key = frozenset(_edge(tup[a], tup[b]) for a, b in f.sorted_edges)
        if key not in least or tup < least[key]:
            least[key] = tup
    ordered = sorted(least.values())
    copies = tuple(label_copy(f, tup, index) for index, tup in enumerate(ordered))

    cover = {edge: 0 for edge in g.sorted_edges}
    for copy in copies:
        for edge in copy.edges:
            cover[edge] += 1
    uncovered = tuple(edge for edge, count in cover.items() if count == 0)
    multiple = tuple(edge for edge, count in cover.items() if count > 1)
    return CopyEnumeration(copies, not uncovered and not multiple, uncovered, multiple)


@dataclass(frozen=True, eq=False)
class StarLabelling:
    """Base vertex and 1-based label coordinates of every vertex of a star graph."""

    delta: int
    m: int
    bases: np.ndarray
    coords: np.ndarray

    def __post_init__(self) -> None:
        if self.coords.shape != (self.bases.shape[0], self.m):
            raise PreconditionError("INVALID_LABEL: coordinate table has the wrong shape")
        if self.coords.size and (self.coords.min() < 1 or self.coords.max() > self.delta):
            raise PreconditionError(f"INVALID_LABEL: coordinates must lie in [1,{self.delta}]")

    @property
    def size(self) -> int:
        return int(self.bases.shape[0])

    def classes(self) -> dict[int, np.ndarray]:
        """Star vertex ids grouped by base vertex, in ascending id order."""
        grouped: dict[int, np.ndarray] = {}
        for base in np.unique(self.bases):
            grouped[int(base)] = np.flatnonzero(self.bases == base)
        return grouped


@dataclass(frozen=True)
class StarGraph:
    graph: Graph
    base: Graph
    delta: int
    copies: tuple[LabelledCopy, ...]

    @property
    def m(self) -> int:
        return len(self.copies)

    @property
    def block(self) -> int:
        return self.delta**self.m

    def vertex_id(self, v: int, coords: Sequence[int]) -> int:
        """Vertex (v, x) with x given 1-based; digit k of the offset is coordinate k."""
        offset = sum((c - 1) * self.delta**k for k, c in enumerate(coords))
        return v * self.block + offset

    def base_vertex(self, vertex: int) -> int:
        return vertex // self.block

    def coordinates(self, vertex: int) -> tuple[int, ...]:
        offset = vertex % self.block
        return tuple((offset // self.delta**k) % self.delta + 1 for k in range(self.m))

    def labelling(self) -> StarLabelling:
        ids = np.arange(self.graph.n, dtype=np.int64)
        powers = self.delta ** np.arange(self.m, dtype=np.int64)
        coords = ((ids % self.block)[:, None] // powers) % self.delta + 1
        return StarLabelling(
            self.delta, self.m, ids // self.block, coords.reshape(self.graph.n, self.m)
        )


def _free_offsets(delta: int, m: int, k: int) -> np.ndarray:
    """Offsets in [0, Δ^m) whose digit k is zero."""
    offsets = np.arange(delta**m, dtype=np.int64)
    return offsets[(offsets // delta**k) % delta == 0]


def build_star(
    g: Graph, copies: Sequence[LabelledCopy], f: Graph, size_cap: int = DEFAULT_STAR_CAP
) -> StarGraph:
    owner: dict[tuple[int, int], LabelledCopy] = {}
    for copy in copies:
        for edge in copy.edges:
            if edge in owner:
                raise PreconditionError(f"UNIQUE_COVER_FAILED: edge {edge} lies in two copies")
            owner[edge] = copy
    missing = [edge for edge in g.sorted_edges if edge not in owner]
    if missing or len(owner) != g.edge_count:
        raise PreconditionError(f"UNIQUE_COVER_FAILED: edges {missing[:5]} lie in no copy")

    delta, m = max(f.max_degree(), 1), len(copies)
    block = delta**m
    if g.n * block > size_cap:
        raise ResourceCapError(
            f"CAP_STAR_SIZE: n*Δ^m = {g.n}*{delta}^{m} = {g.n * block} exceeds cap {size_cap}"
        )
    chunks: list[np.ndarray] = []
    for (u, v), copy in sorted(owner.items()):
        k = copy.index
        i, j = copy.labels[(u, v)]
        free = _free_offsets(delta, m, k)
        xs = u * block + free + (i - 1) * delta**k
        ys = v * block + free + (j - 1) * delta**k
        grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        chunks.append(grid)
    pairs = np.concatenate(chunks).tolist() if chunks else []
    star = StarGraph(Graph.from_edges(g.n * block, pairs), g, delta, tuple(copies))
    logger.info(
        "Built star graph",
        extra={"stage": "star", "detail": f"vertices={star.graph.n} edges={star.graph.edge_count}"},
    )
    return star


def star_projection(star: StarGraph) -> VertexMap:
    image = tuple(v // star.block for v in range(star.graph.n))
    return VertexMap(star.graph.n, star.base.n, image)


def audit_copy_bipartite(star: StarGraph) -> list[str]:
    """Check that each copy's edges form matched complete bipartite pieces.

    For a star vertex (v, x) and a copy edge vw with labels (i, j), its neighbours over w
    must be exactly the (w, y) with y_k = j when x_k = i, and none otherwise.
    """
    failures: list[str] = []
    edge_owner = {edge: copy for copy in star.copies for edge in copy.edges}
    for vertex in range(star.graph.n):
        v = star.base_vertex(vertex)
        coords = star.coordinates(vertex)
        for w in sorted(star.base.neighbors(v)):
            edge = _edge(v, w)
            copy = edge_owner[edge]
            labels = copy.labels[edge]
            mine, theirs = (labels[0], labels[1]) if v < w else (labels[1], labels[0])
            k = copy.index
            actual = {x for x in star.graph.neighbors(vertex) if x // star.block == w}
            if coords[k] == mine:
                expected = {
                    x
                    for x in range(w * star.block, (w + 1) * star.block)
                    if star.coordinates(x)[k] == theirs
                }
            else:
                expected = set()
            if actual != expected:
                failures.append(f"vertex {vertex} over base edge {edge} in copy {k}")
    return failures


@dataclass(frozen=True)
class FForest:
    f: Graph
    graph: Graph
    placements: tuple[tuple[int, ...], ...]
    hosts: tuple[int, ...]

    def labelled_copies(self) -> list[LabelledCopy]:
        return [label_copy(self.f, tup, k) for k, tup in enumerate(self.placements)]


def make_f_forest(
    f: Graph,
    plan: Sequence[int | None],
    seed: int | None = None,
    glue_vertex: int = 0,
) -> FForest:
    """Start from one copy of F, then attach one copy per plan entry.

    Entry h glues F-vertex ``glue_vertex`` of the new copy onto forest vertex h; entry None
    draws the host uniformly from the current vertices with the seeded generator.
    """
    if f.n == 0 or not 0 <= glue_vertex < f.n:
        raise PreconditionError("INVALID_ATTACHMENT: glue vertex outside F")
    if any(host is None for host in plan) and seed is None:
        raise PreconditionError("SEED_REQUIRED: random attachment needs an explicit seed")
    rng = np.random.default_rng(seed)
    placements: list[tuple[int, ...]] = [tuple(range(f.n))]
    hosts: list[int] = []
    size = f.n
    for step, host in enumerate(plan, start=1):
        if host is None:
            host = int(rng.integers(size))
        if not 0 <= host < size:
            raise PreconditionError(
                f"INVALID_ATTACHMENT: step {step} attaches at {host}, forest has {size} vertices"
            )
        placement = []
        fresh = size
        for a in range(f.n):
            if a == glue_vertex:
                placement.append(host)
            else:
                placement.append(fresh)
                fresh += 1
        placements.append(tuple(placement))
        hosts.append(host)
        size = fresh
    pairs = [(tup[a], tup[b]) for tup in placements for a, b in f.sorted_edges]
    return FForest(f, Graph.from_edges(size, pairs), tuple(placements), tuple(hosts))


def random_k3_forest(copies: int, seed: int) -> FForest:
    if copies < 1:
        raise PreconditionError(f"INVALID_ATTACHMENT: need at least one copy, got {copies}")
    return make_f_forest(complete_graph(3), [None] * (copies - 1), seed=seed)


def check_t_star_odd_girth(forest: FForest, size_cap: int = DEFAULT_STAR_CAP) -> int | None:
    if forest.f != complete_graph(3):
        raise PreconditionError("PRECONDITION_PATTERN: star odd-girth check is for K3-forests")
    star = build_star(forest.graph, forest.labelled_copies(), forest.f, size_cap)
    return odd_girth(star.graph)
