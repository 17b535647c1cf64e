"""Graph types, exact invariant checkers and the basic constructions.

Vertices are dense integer ids ``0..n-1``; every graph is immutable once built.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from homforge.failure_taxonomy import (
    InternalConsistencyError,
    PreconditionError,
    ResourceCapError,
)
from homforge.metrics import SEARCH_NODES
from homforge.types import HomFreeness, SearchStatus

logger = logging.getLogger(__name__)

DEFAULT_HOM_BUDGET = 10_000_000
DEFAULT_EXACT_DOMINATION_LIMIT = 24
DEFAULT_VC_CAP = 8
TOLERANCE = 1e-9
_COVER_CHUNK = 512


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise PreconditionError(f"INVALID_GRAPH: negative vertex count {self.n}")
        for u, v in self.edges:
            if u == v:
                raise PreconditionError(f"INVALID_GRAPH: loop at vertex {u}")
            if not 0 <= u < v < self.n:
                raise PreconditionError(
                    f"INVALID_GRAPH: edge ({u},{v}) not a normalized pair in [0,{self.n})"
                )

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable[tuple[int, int]]) -> Graph:
        normalized: set[tuple[int, int]] = set()
        for u, v in pairs:
            u, v = int(u), int(v)
            if u == v:
                raise PreconditionError(f"INVALID_GRAPH: loop at vertex {u}")
            normalized.add(_edge(u, v))
        return cls(int(n), frozenset(normalized))

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(entry) for entry in nbrs)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(entry) for entry in self.adjacency)

    @cached_property
    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return self.degrees[v]

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and _edge(u, v) in self.edges

    def min_degree(self) -> int:
        return min(self.degrees, default=0)

    def max_degree(self) -> int:
        return max(self.degrees, default=0)

    def isolated_vertices(self) -> tuple[int, ...]:
        return tuple(v for v, d in enumerate(self.degrees) if d == 0)

    def edge_within(self, vertices: Iterable[int]) -> tuple[int, int] | None:
        """Least edge with both ends in ``vertices``, or None when the set is independent."""
        members = set(vertices)
        found = [e for e in self.edges if e[0] in members and e[1] in members]
        return min(found) if found else None

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
        """Induced subgraph on ``vertices`` relabelled in ascending order, plus new->old ids."""
        order = tuple(sorted(set(vertices)))
        index = {v: i for i, v in enumerate(order)}
        pairs = [
            (index[u], index[v]) for u, v in self.edges if u in index and v in index
        ]
        return Graph.from_edges(len(order), pairs), order

    def adjacency_matrix(self, dtype=np.int64) -> np.ndarray:
        matrix = np.zeros((self.n, self.n), dtype=dtype)
        if self.edges:
            rows, cols = np.array(self.sorted_edges).T
            matrix[rows, cols] = 1
            matrix[cols, rows] = 1
        return matrix

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.sorted_edges)
        return graph


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    weights: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.weights, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise PreconditionError(f"INVALID_WEIGHTS: expected a square matrix, got {arr.shape}")
        if not np.array_equal(arr, arr.T):
            raise PreconditionError("INVALID_WEIGHTS: weight function is not symmetric")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise PreconditionError("INVALID_WEIGHTS: weights must lie in [0,1]")
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    def weight(self, i: int, j: int) -> float:
        return float(self.weights[i, j])

    @classmethod
    def from_graph(cls, g: Graph) -> WeightedGraph:
        return cls(g.adjacency_matrix(dtype=float))


@dataclass(frozen=True)
class ViolationStats:
    violated: tuple[tuple[int, int], ...]

    @property
    def count(self) -> int:
        return len(self.violated)


@dataclass(frozen=True)
class VertexMap:
    source_n: int
    target_n: int
    image: tuple[int, ...]
    _stats: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if len(self.image) != self.source_n:
            raise PreconditionError(
                f"INVALID_MAP: {len(self.image)} images for {self.source_n} source vertices"
            )
        for v, w in enumerate(self.image):
            if not 0 <= w < self.target_n:
                raise PreconditionError(
                    f"INVALID_MAP: image of {v} is {w}, outside [0,{self.target_n})"
                )

    def __call__(self, v: int) -> int:
        return self.image[v]

    @classmethod
    def constant(cls, source_n: int, target_n: int, value: int = 0) -> VertexMap:
        return cls(source_n, target_n, tuple([value] * source_n))

    @classmethod
    def identity(cls, n: int) -> VertexMap:
        return cls(n, n, tuple(range(n)))

    @classmethod
    def from_mapping(cls, source_n: int, target_n: int, mapping: dict[int, int]) -> VertexMap:
        missing = [v for v in range(source_n) if v not in mapping]
        if missing:
            raise PreconditionError(f"INVALID_MAP: no image for vertices {missing[:5]}")
        return cls(source_n, target_n, tuple(int(mapping[v]) for v in range(source_n)))

    def then(self, other: VertexMap) -> VertexMap:
        """Composition: apply this map, then ``other``."""
        if other.source_n != self.target_n:
            raise PreconditionError(
                f"DIMENSION_MISMATCH: cannot compose into {other.source_n} from {self.target_n}"
            )
        return VertexMap(self.source_n, other.target_n, tuple(other.image[w] for w in self.image))

    def violation_stats(self, src: Graph, dst: Graph) -> ViolationStats:
        key = (src, dst)
        cached = self._stats.get(key)
        if cached is None:
            image = self.image
            violated = tuple(
                (u, v) for u, v in src.sorted_edges if not dst.has_edge(image[u], image[v])
            )
            cached = ViolationStats(violated)
            self._stats[key] = cached
        return cached


def count_violations(m: VertexMap, src: Graph, dst: Graph) -> int:
    if m.source_n != src.n or m.target_n != dst.n:
        raise PreconditionError(
            "DIMENSION_MISMATCH: map is "
            f"{m.source_n}->{m.target_n}, graphs are {src.n}->{dst.n}"
        )
    return m.violation_stats(src, dst).count


def _double_cover(g: Graph) -> csr_matrix:
    n = g.n
    rows: list[int] = []
    cols: list[int] = []
    for u, v in g.sorted_edges:
        rows.extend((u, v + n, v, u + n))
        cols.extend((v + n, u, u + n, v))
    data = np.ones(len(rows), dtype=float)
    return csr_matrix((data, (rows, cols)), shape=(2 * n, 2 * n))


def _odd_walk_lengths(g: Graph, limit: float = np.inf) -> np.ndarray:
    """Per vertex v, the shortest odd closed walk through v (distance (v,0)->(v,1))."""
    cover = _double_cover(g)
    lengths = np.full(g.n, np.inf)
    for start in range(0, g.n, _COVER_CHUNK):
        sources = np.arange(start, min(start + _COVER_CHUNK, g.n))
        dist = dijkstra(cover, directed=False, indices=sources, unweighted=True, limit=limit)
        lengths[sources] = dist[np.arange(len(sources)), sources + g.n]
    return lengths


def odd_girth_up_to(g: Graph, max_length: float) -> int | None:
    """Shortest odd cycle length if it is at most ``max_length``, else None."""
    if g.n == 0 or not g.edges:
        return None
    lengths = _odd_walk_lengths(g, limit=max_length)
    best = float(lengths.min())
    if math.isinf(best) or best > max_length:
        return None
    return int(best)


def odd_girth(g: Graph) -> int | None:
    return odd_girth_up_to(g, np.inf)


def shortest_odd_cycle(g: Graph, max_length: float = np.inf) -> list[int] | None:
    """Vertex sequence of a shortest odd cycle (no repeated endpoint), or None."""
    if g.n == 0 or not g.edges:
        return None
    lengths = _odd_walk_lengths(g, limit=max_length)
    v = int(np.argmin(lengths))
    if math.isinf(lengths[v]):
        return None
    cover = _double_cover(g)
    _, predecessors = dijkstra(
        cover, directed=False, indices=v, unweighted=True, return_predecessors=True
    )
    walk = [v + g.n]
    while walk[-1] != v:
        walk.append(int(predecessors[walk[-1]]))
    walk.reverse()
    # the minimum odd closed walk overall is a simple cycle
    return [node % g.n for node in walk[:-1]]


def girth(g: Graph) -> int | None:
    """Length of a shortest cycle of any parity, or None for forests."""
    best = math.inf
    adjacency = g.adjacency
    for root in range(g.n):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return None if math.isinf(best) else int(best)


@dataclass(frozen=True)
class HomSearchResult:
    status: SearchStatus
    mapping: VertexMap | None
    nodes: int

    @property
    def found(self) -> bool:
        return self.status is SearchStatus.FOUND


def find_homomorphism(
    src: Graph, dst: Graph, budget: int = DEFAULT_HOM_BUDGET
) -> HomSearchResult:
    """Backtracking search in descending-degree order; ``budget`` caps node expansions."""
    if src.n == 0:
        return HomSearchResult(SearchStatus.FOUND, VertexMap(0, dst.n, ()), 0)
    if dst.n == 0 or (src.edges and not dst.edges):
        return HomSearchResult(SearchStatus.NONE, None, 0)

    order = sorted(range(src.n), key=lambda v: (-src.degree(v), v))
    position = {v: i for i, v in enumerate(order)}
    earlier = [
        sorted(u for u in src.neighbors(v) if position[u] < position[v]) for v in order
    ]
    dst_adj = dst.adjacency
    all_targets = tuple(range(dst.n))
    image = [-1] * src.n

    def candidates(i: int) -> Iterator[int]:
        prev = earlier[i]
        if not prev:
            return iter(all_targets)
        allowed = set(dst_adj[image[prev[0]]])
        for u in prev[1:]:
            allowed &= dst_adj[image[u]]
            if not allowed:
                break
        return iter(sorted(allowed))

    nodes = 0
    stack: list[Iterator[int]] = [candidates(0)]
    status = SearchStatus.NONE
    while stack:
        depth = len(stack) - 1
        choice = next(stack[-1], None)
        if choice is None:
            image[order[depth]] = -1
            stack.pop()
            continue
        if nodes >= budget:
            status = SearchStatus.UNKNOWN
            break
        nodes += 1
        image[order[depth]] = choice
        if depth + 1 == len(order):
            status = SearchStatus.FOUND
            break
        stack.append(candidates(depth + 1))

    SEARCH_NODES.labels(search="hom").inc(nodes)
    if status is SearchStatus.FOUND:
        mapping = VertexMap(src.n, dst.n, tuple(image))
        if count_violations(mapping, src, dst):
            raise InternalConsistencyError("INTERNAL_HOM_SEARCH: returned map violates edges")
        return HomSearchResult(status, mapping, nodes)
    if status is SearchStatus.UNKNOWN:
        logger.info("Homomorphism search budget exhausted", extra={"stage": "hom_search"})
    return HomSearchResult(status, None, nodes)


def is_odd_cycle(g: Graph) -> bool:
    return (
        g.n >= 3
        and g.n % 2 == 1
        and g.edge_count == g.n
        and all(d == 2 for d in g.degrees)
        and nx.is_connected(g.to_networkx())
    )


def is_hom_free(host: Graph, pattern: Graph, budget: int = DEFAULT_HOM_BUDGET) -> HomFreeness:
    # C_l maps into a graph exactly when its odd girth is at most l
    if is_odd_cycle(pattern):
        shortest = odd_girth_up_to(host, pattern.n)
        return HomFreeness.FREE if shortest is None else HomFreeness.NOT_FREE
    result = find_homomorphism(pattern, host, budget)
    if result.status is SearchStatus.FOUND:
        return HomFreeness.NOT_FREE
    if result.status is SearchStatus.NONE:
        return HomFreeness.FREE
    return HomFreeness.UNKNOWN


def blowup(g: Graph, part_sizes: Sequence[int]) -> Graph:
    if len(part_sizes) != g.n:
        raise PreconditionError(
            f"DIMENSION_MISMATCH: {len(part_sizes)} part sizes for {g.n} vertices"
        )
    if any(size <= 0 for size in part_sizes):
        raise PreconditionError("INVALID_PART_SIZE: every part size must be positive")
    offsets = [0, *itertools.accumulate(part_sizes)]
    pairs = [
        (a, b)
        for u, v in g.sorted_edges
        for a in range(offsets[u], offsets[u + 1])
        for b in range(offsets[v], offsets[v + 1])
    ]
    return Graph.from_edges(offsets[-1], pairs)


def blowup_projection(part_sizes: Sequence[int]) -> VertexMap:
    image = tuple(v for v, size in enumerate(part_sizes) for _ in range(size))
    return VertexMap(len(image), len(part_sizes), image)


def two_subdivision(f: Graph) -> Graph:
    """Edge e = uv (in sorted order) gets vertices n+2e next to u and n+2e+1 next to v."""
    pairs: list[tuple[int, int]] = []
    for index, (u, v) in enumerate(f.sorted_edges):
        a, b = f.n + 2 * index, f.n + 2 * index + 1
        pairs.extend(((u, a), (a, b), (b, v)))
    return Graph.from_edges(f.n + 2 * f.edge_count, pairs)


def subdivision_projection(f: Graph) -> VertexMap:
    image = list(range(f.n))
    for u, v in f.sorted_edges:
        image.extend((v, u))
    return VertexMap(f.n + 2 * f.edge_count, f.n, tuple(image))


def neighborhood_layers(g: Graph, seed_set: Iterable[int], t: int) -> list[frozenset[int]]:
    current = frozenset(seed_set)
    bad = [v for v in current if not 0 <= v < g.n]
    if bad:
        raise PreconditionError(f"INVALID_VERTEX: seed vertices {sorted(bad)} out of range")
    layers = [current]
    seen = set(current)
    for _ in range(t):
        nxt = frozenset(w for v in current for w in g.neighbors(v) if w not in seen)
        seen |= nxt
        layers.append(nxt)
        current = nxt
    return layers


def _closed_masks(g: Graph) -> list[int]:
    masks = []
    for v in range(g.n):
        mask = 1 << v
        for u in g.neighbors(v):
            mask |= 1 << u
        masks.append(mask)
    return masks


def undominated_vertices(g: Graph, dominators: Iterable[int]) -> list[int]:
    covered = set()
    for a in dominators:
        covered.add(a)
        covered |= g.neighbors(a)
    return [v for v in range(g.n) if v not in covered]


def minimum_dominating_set(
    g: Graph, exact_limit: int = DEFAULT_EXACT_DOMINATION_LIMIT
) -> tuple[int, ...]:
    if g.n > exact_limit:
        raise ResourceCapError(
            f"CAP_EXACT_DOMINATION: n={g.n} exceeds exact limit {exact_limit}; "
            "use greedy_dominating_set"
        )
    forced = g.isolated_vertices()
    masks = _closed_masks(g)
    full = (1 << g.n) - 1
    base = 0
    for v in forced:
        base |= masks[v]
    if base == full:
        return forced
    free = [v for v in range(g.n) if v not in set(forced)]
    for size in range(1, len(free) + 1):
        for combo in itertools.combinations(free, size):
            acc = base
            for v in combo:
                acc |= masks[v]
            if acc == full:
                return tuple(sorted((*forced, *combo)))
    raise InternalConsistencyError("INTERNAL_DOMINATION: exhaustive search found no cover")


def domination_number(g: Graph, exact_limit: int = DEFAULT_EXACT_DOMINATION_LIMIT) -> int:
    return len(minimum_dominating_set(g, exact_limit))


def greedy_dominating_set(g: Graph) -> tuple[int, ...]:
    undominated = set(range(g.n))
    chosen: list[int] = []
    while undominated:
        best = max(
            range(g.n),
            key=lambda u: (len((g.neighbors(u) | {u}) & undominated), -u),
        )
        chosen.append(best)
        undominated -= g.neighbors(best) | {best}
    return tuple(sorted(chosen))


@dataclass(frozen=True)
class VCResult:
    dimension: int
    at_cap: bool
    witness: tuple[int, ...]

    def render(self) -> str:
        return f">={self.dimension}" if self.at_cap else str(self.dimension)


def vc_dimension(g: Graph, d_cap: int = DEFAULT_VC_CAP) -> VCResult:
    """Largest vertex set shattered by the neighbourhoods, searched level by level."""
    nbr_masks = [sum(1 << u for u in g.neighbors(v)) for v in range(g.n)]

    def shattered(subset: tuple[int, ...]) -> bool:
        smask = sum(1 << v for v in subset)
        traces = {mask & smask for mask in nbr_masks}
        return len(traces) == 1 << len(subset)

    level: list[tuple[int, ...]] = [()]
    level_set = {()}
    best: tuple[int, ...] = ()
    for size in range(1, d_cap + 1):
        if (1 << size) > g.n:
            break
        found: list[tuple[int, ...]] = []
        for subset in level:
            start = subset[-1] + 1 if subset else 0
            for v in range(start, g.n):
                candidate = (*subset, v)
                if size > 1 and not all(
                    tuple(x for x in candidate if x != y) in level_set for y in candidate
                ):
                    continue
                if shattered(candidate):
                    found.append(candidate)
        if not found:
            break
        level, level_set, best = found, set(found), found[0]
    return VCResult(len(best), len(best) == d_cap, best)


def is_epsilon_net(g: Graph, net: Iterable[int], eps: float) -> bool:
    members = set(net)
    threshold = eps * g.n - TOLERANCE
    return all(
        members & g.neighbors(v) for v in range(g.n) if g.degree(v) > 0 and g.degree(v) >= threshold
    )


def greedy_epsilon_net(g: Graph, eps: float) -> tuple[int, ...]:
    if not 0 < eps <= 1:
        raise PreconditionError(f"INVALID_EPS: eps={eps} outside (0,1]")
    threshold = eps * g.n - TOLERANCE
    uncovered = {v for v in range(g.n) if g.degree(v) > 0 and g.degree(v) >= threshold}
    net: list[int] = []
    # u hits N(v) exactly when v is a neighbour of u
    while uncovered:
        best = max(range(g.n), key=lambda u: (len(g.neighbors(u) & uncovered), -u))
        net.append(best)
        uncovered -= g.neighbors(best)
    result = tuple(sorted(net))
    if not is_epsilon_net(g, result, eps):
        raise InternalConsistencyError("INTERNAL_EPSILON_NET: greedy net failed verification")
    return result


def epsilon_net_size_bound(d: int, eps: float) -> float:
    if d <= 0:
        return 0.0
    ratio = 8 * d / eps
    return ratio * math.log2(ratio)


def edgeless_graph(n: int) -> Graph:
    return Graph(n, frozenset())


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise PreconditionError(f"INVALID_CYCLE: cycles need at least 3 vertices, got {n}")
    return Graph.from_edges(n, ((v, (v + 1) % n) for v in range(n)))


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((v, v + 1) for v in range(n - 1)))


def complete_bipartite_graph(a: int, b: int) -> Graph:
    return Graph.from_edges(a + b, ((u, a + w) for u in range(a) for w in range(b)))


def star_graph(leaves: int) -> Graph:
    return complete_bipartite_graph(1, leaves)


def disjoint_union(*graphs: Graph) -> Graph:
    offset = 0
    pairs: list[tuple[int, int]] = []
    for g in graphs:
        pairs.extend((u + offset, v + offset) for u, v in g.edges)
        offset += g.n
    return Graph.from_edges(offset, pairs)


def bowtie_graph() -> Graph:
    """Two triangles sharing vertex 0."""
    return Graph.from_edges(5, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])
