from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

from homforge.failure_taxonomy import InternalConsistencyError, PreconditionError
from homforge.graph_core import Graph, VertexMap, count_violations, neighborhood_layers

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MycielskiVertex:
    base: int | None
    layer: int | None

    @property
    def is_root(self) -> bool:
        return self.base is None

    def render(self) -> str:
        return "r" if self.is_root else f"{self.base} {self.layer}"


ROOT = MycielskiVertex(None, None)


@dataclass(frozen=True)
class Mycielskian:
    """M_t(base); vertex (v, i) has id (i-1)*|base| + v and the root is last."""

    graph: Graph
    base: Graph
    t: int

    @property
    def root(self) -> int:
        return (self.t + 1) * self.base.n

    def vertex_id(self, v: int, layer: int) -> int:
        if not 1 <= layer <= self.t + 1:
            raise PreconditionError(f"INVALID_LAYER: layer {layer} outside [1,{self.t + 1}]")
        return (layer - 1) * self.base.n + v

    def label(self, vertex: int) -> MycielskiVertex:
        if vertex == self.root:
            return ROOT
        layer, v = divmod(vertex, self.base.n)
        return MycielskiVertex(v, layer + 1)

    def labels(self) -> list[MycielskiVertex]:
        return [self.label(v) for v in range(self.graph.n)]


def t_fold_mycielskian(gamma: Graph, t: int) -> Mycielskian:
    if t < 1:
        raise PreconditionError(f"PRECONDITION_T: t must be at least 1, got {t}")
    size = gamma.n
    root = (t + 1) * size
    top = t * size
    pairs: list[tuple[int, int]] = [(top + u, top + v) for u, v in gamma.sorted_edges]
    pairs.extend((root, v) for v in range(size))
    for layer in range(1, t + 1):
        low, high = (layer - 1) * size, layer * size
        for u, v in gamma.sorted_edges:
            pairs.append((low + u, high + v))
            pairs.append((low + v, high + u))
    return Mycielskian(Graph.from_edges(root + 1, pairs), gamma, t)


def extend_homomorphism(
    g: Graph,
    u_set: Iterable[int],
    phi: VertexMap,
    t: int,
    gamma: Graph,
    target: Mycielskian | None = None,
) -> tuple[VertexMap, Mycielskian]:
    """Extend phi: g[u_set] -> gamma to a homomorphism g -> M_t(gamma).

    ``phi`` indexes g[u_set] in ascending vertex order. The complement I of u_set goes to
    the root, N^i(I) to layer i and everything else to the top copy of gamma.
    """
    members = sorted(set(u_set))
    if any(not 0 <= v < g.n for v in members):
        raise PreconditionError("INVALID_VERTEX: u_set contains vertices outside the graph")
    sub, order = g.induced_subgraph(members)
    if phi.source_n != sub.n or phi.target_n != gamma.n:
        raise PreconditionError(
            f"DIMENSION_MISMATCH: phi is {phi.source_n}->{phi.target_n}, "
            f"expected {sub.n}->{gamma.n}"
        )
    broken = phi.violation_stats(sub, gamma).violated
    if broken:
        a, b = broken[0]
        raise PreconditionError(
            f"PHI_NOT_HOMOMORPHISM: edge ({order[a]},{order[b]}) maps to non-edge "
            f"({phi(a)},{phi(b)})"
        )

    independent = set(range(g.n)).difference(members)
    layers = neighborhood_layers(g, independent, t)
    for depth, layer in enumerate(layers):
        edge = g.edge_within(layer)
        if edge is not None:
            raise PreconditionError(
                f"LAYER_NOT_INDEPENDENT: N^{depth}(I) contains edge ({edge[0]},{edge[1]})"
            )

    if target is None:
        target = t_fold_mycielskian(gamma, t)
    elif target.base != gamma or target.t != t:
        raise PreconditionError("DIMENSION_MISMATCH: supplied Mycielskian does not match gamma")

    layer_of = {v: depth for depth in range(1, t + 1) for v in layers[depth]}
    position = {v: index for index, v in enumerate(members)}
    image = []
    for v in range(g.n):
        if v in independent:
            image.append(target.root)
        else:
            image.append(target.vertex_id(phi(position[v]), layer_of.get(v, t + 1)))
    psi = VertexMap(g.n, target.graph.n, tuple(image))
    if count_violations(psi, g, target.graph):
        raise InternalConsistencyError("INTERNAL_EXTENSION: extended map violates edges")
    logger.debug(
        "Extended homomorphism",
        extra={"stage": "extend", "detail": f"I={len(independent)} t={t}"},
    )
    return psi, target


def mycielskian_size(n: int, e: int, t: int) -> tuple[int, int]:
    """Vertex and edge counts of M_t applied to a graph with n vertices and e edges."""
    return (t + 1) * n + 1, (2 * t + 1) * e + n
