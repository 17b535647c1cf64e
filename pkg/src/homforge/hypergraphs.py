"""Berge cycles, hyperforests and sparse high-girth partite hypergraphs."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from homforge.failure_taxonomy import (
    InternalConsistencyError,
    PreconditionError,
    ResourceCapError,
)
from homforge.graph_core import Graph, girth

logger = logging.getLogger(__name__)

DEFAULT_RETRIES = 8
DEFAULT_TRANSVERSAL_CAP = 10_000_000


@dataclass(frozen=True)
class Hypergraph:
    """Vertices 0..n-1; ``f`` is the uniformity, None for mixed edge sizes."""

    n: int
    edges: frozenset[tuple[int, ...]]
    f: int | None = None
    parts: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.n < 0:
            raise PreconditionError(f"INVALID_HYPERGRAPH: negative vertex count {self.n}")
        for edge in self.edges:
            if list(edge) != sorted(set(edge)):
                raise PreconditionError(f"INVALID_HYPEREDGE: {edge} is not a sorted vertex set")
            if not edge or edge[0] < 0 or edge[-1] >= self.n:
                raise PreconditionError(f"INVALID_HYPEREDGE: {edge} outside 0..{self.n - 1}")
            if self.f is not None and len(edge) != self.f:
                raise PreconditionError(f"INVALID_HYPEREDGE: {edge} does not have size {self.f}")
        if self.parts is not None:
            owner = self.part_of
            if self.f is not None and len(self.parts) != self.f:
                raise PreconditionError(
                    f"INVALID_PARTS: {len(self.parts)} parts for uniformity {self.f}"
                )
            for edge in self.edges:
                if sorted(owner.get(v, -1) for v in edge) != list(range(len(self.parts))):
                    raise PreconditionError(
                        f"INVALID_PARTS: edge {edge} does not meet every part exactly once"
                    )

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Iterable[int]],
        f: int | None = None,
        parts: Sequence[Sequence[int]] | None = None,
    ) -> Hypergraph:
        normalized = frozenset(tuple(sorted(set(edge))) for edge in edges)
        frozen_parts = None if parts is None else tuple(tuple(sorted(p)) for p in parts)
        return cls(n, normalized, f, frozen_parts)

    @cached_property
    def sorted_edges(self) -> tuple[tuple[int, ...], ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def part_of(self) -> dict[int, int]:
        if self.parts is None:
            return {}
        owner: dict[int, int] = {}
        for index, part in enumerate(self.parts):
            for v in part:
                if v in owner or not 0 <= v < self.n:
                    raise PreconditionError(f"INVALID_PARTS: vertex {v} repeated or out of range")
                owner[v] = index
        return owner

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def without(self, edge: tuple[int, ...]) -> Hypergraph:
        return Hypergraph(self.n, self.edges - {edge}, self.f, self.parts)


def incidence_graph(h: Hypergraph) -> Graph:
    """Bipartite vertex-edge incidence graph; hyperedge j becomes vertex n + j."""
    pairs = [(v, h.n + j) for j, edge in enumerate(h.sorted_edges) for v in edge]
    return Graph.from_edges(h.n + h.edge_count, pairs)


def shortest_berge_cycle(h: Hypergraph, g_cap: int) -> int | None:
    if g_cap < 2:
        raise PreconditionError(f"PRECONDITION_GIRTH: g_cap must be at least 2, got {g_cap}")
    # Berge k-cycles are exactly the 2k-cycles of the incidence graph
    length = girth(incidence_graph(h))
    if length is None or length // 2 > g_cap:
        return None
    return length // 2


def find_short_berge_cycle(h: Hypergraph, g_cap: int) -> list[tuple[int, ...]] | None:
    """Hyperedges of some Berge cycle of length at most ``g_cap``, or None."""
    incidence = incidence_graph(h).to_networkx()
    cycle = next(nx.simple_cycles(incidence, length_bound=2 * g_cap), None)
    if cycle is None:
        return None
    return sorted(h.sorted_edges[node - h.n] for node in cycle if node >= h.n)


@dataclass(frozen=True)
class HyperforestVerdict:
    is_forest: bool
    build_sequence: tuple[tuple[int, ...], ...]


def is_hyperforest(h: Hypergraph) -> HyperforestVerdict:
    """Peel edges meeting the rest in at most one vertex; the reversed peel builds h."""
    remaining = list(h.sorted_edges)
    peeled: list[tuple[int, ...]] = []
    while remaining:
        for index, edge in enumerate(remaining):
            others = {v for other in remaining[:index] + remaining[index + 1:] for v in other}
            if len(others.intersection(edge)) <= 1:
                peeled.append(remaining.pop(index))
                break
        else:
            return HyperforestVerdict(False, ())
    return HyperforestVerdict(True, tuple(reversed(peeled)))


def hyperforest_build_sequence(h: Hypergraph) -> tuple[tuple[int, ...], ...] | None:
    verdict = is_hyperforest(h)
    return verdict.build_sequence if verdict.is_forest else None


def default_edge_constant(f: int, g: int) -> float:
    return 1.0 / (4 * g * f**f)


def edge_probability(n: int, f: int, g: int, c: float) -> float:
    return min(1.0, c * n ** (-f + 1 + 1 / g))


def expected_edge_count(n: int, f: int, g: int, c: float | None = None) -> float:
    c = default_edge_constant(f, g) if c is None else c
    return edge_probability(n, f, g, c) * (n // f) ** f


def expected_short_cycle_bound(n: int, f: int, g: int, c: float | None = None) -> float:
    """Upper estimate of the expected number of Berge cycles of length 2..g."""
    c = default_edge_constant(f, g) if c is None else c
    ratio = n * (n / f) ** (f - 2) * edge_probability(n, f, g, c)
    return sum(ratio**k for k in range(2, g + 1))


def _sample_transversals(
    rng: np.random.Generator, parts: list[range], p: float
) -> list[tuple[int, ...]]:
    size, f = len(parts[0]), len(parts)
    chosen = np.flatnonzero(rng.random(size**f) < p)
    coords = np.unravel_index(chosen, (size,) * f)
    return [
        tuple(parts[i][int(coords[i][row])] for i in range(f)) for row in range(chosen.size)
    ]


def random_high_girth_hypergraph(
    n: int,
    f: int,
    g: int,
    seed: int,
    c: float | None = None,
    retries: int = DEFAULT_RETRIES,
    transversal_cap: int = DEFAULT_TRANSVERSAL_CAP,
) -> Hypergraph:
    if not (n >= f >= 2 and g >= 2):
        raise PreconditionError(
            f"PRECONDITION_HYPERGRAPH: need n >= f >= 2 and g >= 2, got ({n},{f},{g})"
        )
    size = n // f
    if size**f > transversal_cap:
        raise ResourceCapError(
            f"CAP_TRANSVERSALS: {size}^{f} transversals exceed {transversal_cap}"
        )
    c = default_edge_constant(f, g) if c is None else c
    p = edge_probability(n, f, g, c)
    expected = expected_edge_count(n, f, g, c)
    floor = math.floor(expected / 4)
    parts = [range(i * size, (i + 1) * size) for i in range(f)]
    logger.info(
        "Sampling partite hypergraph",
        extra={
            "stage": "hypergraph",
            "detail": f"p={p:.6g} expected={expected:.6g} "
            f"short_cycles<={expected_short_cycle_bound(n, f, g, c):.6g}",
        },
    )
    if expected < 1:
        logger.warning(
            "Expected edge count below one, the sample is likely empty",
            extra={"stage": "hypergraph", "detail": f"expected={expected:.6g} c={c:.6g}"},
        )

    best: Hypergraph | None = None
    for child in np.random.SeedSequence(seed).spawn(retries):
        rng = np.random.default_rng(child)
        h = Hypergraph.from_edges(
            n, _sample_transversals(rng, parts, p), f, [tuple(part) for part in parts]
        )
        while (cycle := find_short_berge_cycle(h, g)) is not None:
            h = h.without(cycle[0])
        if shortest_berge_cycle(h, g) is not None:
            raise InternalConsistencyError("INTERNAL_BERGE_GIRTH: short Berge cycle survived")
        if best is None or h.edge_count > best.edge_count:
            best = h
        if h.edge_count >= floor:
            break
        logger.info("Edge count below floor, resampling", extra={"stage": "hypergraph"})
    assert best is not None
    return best


def decorate_with_f(h: Hypergraph, f: Graph) -> Graph:
    """Place a copy of f on every hyperedge; the vertex in part i plays f-vertex i."""
    if h.f != f.n or h.parts is None or len(h.parts) != f.n:
        raise PreconditionError(
            f"PARTITE_MISMATCH: hypergraph must be {f.n}-uniform and {f.n}-partite"
        )
    owner = h.part_of
    pairs: list[tuple[int, int]] = []
    for edge in h.sorted_edges:
        role = {owner[v]: v for v in edge}
        pairs.extend((role[i], role[j]) for i, j in f.sorted_edges)
    return Graph.from_edges(h.n, pairs)
