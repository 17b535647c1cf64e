"""Homomorphisms of dense or well-dominated high-odd-girth graphs into small targets.

Each pipeline grows its target by repeated t-fold Mycielskians, extending the current
homomorphism one increment at a time, and re-verifies the result before emitting it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from homforge.failure_taxonomy import (
    InternalConsistencyError,
    PreconditionError,
    ResourceCapError,
)
from homforge.graph_core import (
    DEFAULT_EXACT_DOMINATION_LIMIT,
    DEFAULT_VC_CAP,
    TOLERANCE,
    Graph,
    VertexMap,
    complete_graph,
    count_violations,
    edgeless_graph,
    epsilon_net_size_bound,
    greedy_dominating_set,
    greedy_epsilon_net,
    minimum_dominating_set,
    neighborhood_layers,
    odd_girth,
    odd_girth_up_to,
    shortest_odd_cycle,
    undominated_vertices,
    vc_dimension,
)
from homforge.mycielski import extend_homomorphism, mycielskian_size
from homforge.types import CertificateClaims

logger = logging.getLogger(__name__)

DEFAULT_SIZE_CAP = 1_000_000
EXACT_TARGET_GIRTH_LIMIT = 4096
EDGE_CAP_FACTOR = 8


@dataclass(frozen=True)
class LayerDecomposition:
    anchors: tuple[int, ...]
    x_sets: tuple[frozenset[int], ...]
    y_sets: tuple[frozenset[int], ...]
    isolated: frozenset[int]

    @property
    def k(self) -> int:
        return len(self.anchors)

    def increments(self) -> list[frozenset[int]]:
        return [*self.x_sets, *self.y_sets]

    def prefix_sets(self) -> list[frozenset[int]]:
        prefixes: list[frozenset[int]] = []
        acc: frozenset[int] = frozenset()
        for increment in self.increments():
            acc = acc | increment
            prefixes.append(acc)
        return prefixes


@dataclass(frozen=True)
class HomCertificate:
    target: Graph
    map: VertexMap
    claims: CertificateClaims


def disjoint_neighborhood_family(g: Graph) -> LayerDecomposition:
    anchors: list[int] = []
    x_sets: list[frozenset[int]] = []
    used: set[int] = set()
    for v in range(g.n):
        nbrs = g.neighbors(v)
        if nbrs and used.isdisjoint(nbrs):
            anchors.append(v)
            x_sets.append(nbrs)
            used |= nbrs

    isolated = frozenset(g.isolated_vertices())
    y_sets: list[set[int]] = [set() for _ in anchors]
    for v in range(g.n):
        if v in used or v in isolated:
            continue
        # maximality of the family guarantees some X_j meets N(v)
        j = next(index for index, xs in enumerate(x_sets) if g.neighbors(v) & xs)
        y_sets[j].add(v)
    return LayerDecomposition(
        tuple(anchors), tuple(x_sets), tuple(frozenset(ys) for ys in y_sets), isolated
    )


def require_odd_girth(g: Graph, minimum: int, context: str) -> None:
    """Reject g when it has an odd cycle shorter than ``minimum``."""
    cycle = shortest_odd_cycle(g, max_length=minimum - 2)
    if cycle is not None:
        raise PreconditionError(
            f"ODD_GIRTH_PRECONDITION: {context} needs odd girth >= {minimum}; "
            f"found odd cycle of length {len(cycle)}: {cycle}"
        )


def _check_claim_layers(sub: Graph, increment: Iterable[int], t: int, step: int) -> None:
    for depth, layer in enumerate(neighborhood_layers(sub, increment, t)):
        edge = sub.edge_within(layer)
        if edge is not None:
            raise InternalConsistencyError(
                f"INTERNAL_LAYER_DEPENDENCE: step {step}, layer {depth} contains edge {edge}"
            )


def check_target_odd_girth(target: Graph, required: int) -> tuple[int | None, bool]:
    """Exact odd girth for small targets; large ones only get the bounded check."""
    if target.n <= EXACT_TARGET_GIRTH_LIMIT:
        value = odd_girth(target)
        return value, value is None or value >= required
    return None, odd_girth_up_to(target, required - 2) is None


def _certify(
    g: Graph,
    target: Graph,
    mapping: VertexMap,
    t: int,
    *,
    pipeline: str,
    k: int,
    size_bound: int,
    size_bound_expr: str,
    **extra,
) -> CertificateClaims:
    required = 2 * t + 3
    target_girth, girth_ok = check_target_odd_girth(target, required)
    claims = CertificateClaims(
        pipeline=pipeline,
        t=t,
        n=g.n,
        edges=g.edge_count,
        k=k,
        target_vertices=target.n,
        target_edges=target.edge_count,
        size_bound=size_bound,
        size_bound_expr=size_bound_expr,
        size_within_bound=target.n <= size_bound,
        required_odd_girth=required,
        target_odd_girth=target_girth,
        odd_girth_ok=girth_ok,
        violations=count_violations(mapping, g, target),
        **extra,
    )
    if not claims.verified:
        raise InternalConsistencyError(
            f"INTERNAL_CERTIFICATE: {pipeline} output failed verification "
            f"(size {target.n}/{size_bound}, odd girth {target_girth}, "
            f"violations {claims.violations})"
        )
    return claims


def verify_certificate(g: Graph, cert: HomCertificate) -> bool:
    """Independent re-check of a certificate's three claims."""
    if cert.map.source_n != g.n or cert.map.target_n != cert.target.n:
        return False
    _, girth_ok = check_target_odd_girth(cert.target, 2 * cert.claims.t + 3)
    return (
        count_violations(cert.map, g, cert.target) == 0
        and girth_ok
        and cert.target.n <= cert.claims.size_bound
    )


def check_target_growth(
    start: tuple[int, int], t: int, steps: int, size_cap: int = DEFAULT_SIZE_CAP
) -> tuple[int, int]:
    """Predict the target after ``steps`` Mycielskian rounds and enforce the caps.

    Edges are capped at EDGE_CAP_FACTOR times the vertex cap.
    """
    n, e = start
    for _ in range(steps):
        n, e = mycielskian_size(n, e, t)
    if n > size_cap:
        raise ResourceCapError(
            f"CAP_TARGET_SIZE: predicted |target| = {n} exceeds cap {size_cap}"
        )
    if e > EDGE_CAP_FACTOR * size_cap:
        raise ResourceCapError(
            f"CAP_TARGET_EDGES: predicted {e} target edges exceed "
            f"{EDGE_CAP_FACTOR} x cap {size_cap}"
        )
    return n, e


def thm14_size(k: int, t: int) -> int:
    return ((t + 1) ** (2 * k) - 1) // t


def thm14_pipeline(g: Graph, t: int, size_cap: int = DEFAULT_SIZE_CAP) -> HomCertificate:
    if t < 1:
        raise PreconditionError(f"PRECONDITION_T: t must be at least 1, got {t}")
    require_odd_girth(g, 2 * t + 7, "min-degree pipeline")
    decomposition = disjoint_neighborhood_family(g)
    k = decomposition.k
    steps = 2 * k
    predicted = thm14_size(k, t)
    check_target_growth((1, 0), t, max(steps - 1, 0), size_cap)
    logger.info(
        "Layer decomposition ready",
        extra={"stage": "decompose", "detail": f"k={k} isolated={len(decomposition.isolated)}"},
    )

    if k == 0:
        target = edgeless_graph(1)
        mapping = VertexMap.constant(g.n, 1)
        claims = _certify(
            g, target, mapping, t, pipeline="thm14", k=0, size_bound=1,
            size_bound_expr="edgeless input: single-vertex target", layer_sizes=[1],
        )
        return HomCertificate(target, mapping, claims)

    increments = decomposition.increments()
    current = sorted(increments[0])
    gamma = edgeless_graph(1)
    phi = VertexMap.constant(len(current), 1)
    layer_sizes = [1]
    for step in range(1, steps):
        increment = increments[step]
        members = sorted(set(current) | increment)
        sub, order = g.induced_subgraph(members)
        index = {v: i for i, v in enumerate(order)}
        increment_local = [index[v] for v in increment]
        _check_claim_layers(sub, increment_local, t, step)
        phi, myc = extend_homomorphism(sub, [index[v] for v in current], phi, t, gamma)
        gamma, current = myc.graph, members
        layer_sizes.append(gamma.n)

    if gamma.n != predicted:
        raise InternalConsistencyError(
            f"INTERNAL_TARGET_SIZE: built {gamma.n} vertices, expected {predicted}"
        )
    position = {v: i for i, v in enumerate(current)}
    image = tuple(phi(position[v]) if v in position else 0 for v in range(g.n))
    mapping = VertexMap(g.n, gamma.n, image)
    delta = g.min_degree() / g.n
    expr = f"((t+1)^(2k)-1)/t = {predicted}"
    if delta > 0:
        expr += f"; (t+1)^(2/delta) = {(t + 1) ** (2 / delta):.6g}"
    claims = _certify(
        g, gamma, mapping, t, pipeline="thm14", k=k, size_bound=predicted,
        size_bound_expr=expr, layer_sizes=layer_sizes,
    )
    return HomCertificate(gamma, mapping, claims)


def thm15_size(k: int, t: int) -> int:
    """Exact target size of the peeling recursion with k anchors."""
    if k == 0:
        return 1
    size = 2
    for _ in range(k - 1):
        size = (t + 1) * size + 1
    return size


def thm15_bound(k: int, t: int) -> int:
    return 1 if k == 0 else 3 * (t + 1) ** (k - 1) - 1


def dominated_homomorphism(
    g: Graph, active: Iterable[int], anchors: Sequence[int], t: int
) -> tuple[Graph, dict[int, int]]:
    """Peeling recursion on g[active], where ``anchors`` dominate ``active`` inside g.

    Anchors may lie outside ``active``. Peeling a_k removes N(a_k) from the active set and
    recurses without a_k; the base case with one anchor is a star (or edgeless) mapping to K2.
    """
    active_set = frozenset(active)
    missing = [v for v in sorted(active_set) if v not in set(anchors) and not (
        g.neighbors(v) & set(anchors)
    )]
    if missing:
        raise PreconditionError(f"NOT_DOMINATING: vertices {missing[:10]} are not dominated")
    if not anchors:
        return edgeless_graph(1), {}

    chain = [active_set]
    for a in reversed(anchors[1:]):
        chain.append(chain[-1] - g.neighbors(a) - {a})

    base_anchor = anchors[0]
    gamma = complete_graph(2)
    mapping = {v: 0 if v == base_anchor else 1 for v in chain[-1]}
    base_sub, base_order = g.induced_subgraph(chain[-1])
    base_map = VertexMap(base_sub.n, 2, tuple(mapping[v] for v in base_order))
    if count_violations(base_map, base_sub, gamma):
        raise InternalConsistencyError("INTERNAL_STAR_BASE: base case is not a star")

    for level in range(len(chain) - 2, -1, -1):
        current = chain[level]
        peeled = anchors[len(chain) - 1 - level]
        removed = current & g.neighbors(peeled)
        kept = sorted(current - removed)
        # the peeled anchor is isolated in g[kept]; any image works
        local_images = {**mapping}
        if peeled in current:
            local_images[peeled] = 0
        sub, order = g.induced_subgraph(current)
        index = {v: i for i, v in enumerate(order)}
        phi = VertexMap(len(kept), gamma.n, tuple(local_images[v] for v in kept))
        psi, myc = extend_homomorphism(sub, [index[v] for v in kept], phi, t, gamma)
        gamma = myc.graph
        mapping = {v: psi(index[v]) for v in order}
    return gamma, mapping


def thm15_pipeline(
    g: Graph,
    t: int,
    dominating_set: Sequence[int] | None = None,
    exact_limit: int = DEFAULT_EXACT_DOMINATION_LIMIT,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> HomCertificate:
    if t < 1:
        raise PreconditionError(f"PRECONDITION_T: t must be at least 1, got {t}")
    require_odd_girth(g, 2 * t + 5, "domination pipeline")
    warnings: list[str] = []
    if dominating_set is None:
        if g.n <= exact_limit:
            anchors = minimum_dominating_set(g, exact_limit)
        else:
            anchors = greedy_dominating_set(g)
            warnings.append(
                f"greedy dominating set used: n={g.n} exceeds exact limit {exact_limit}"
            )
            logger.warning("Falling back to greedy domination", extra={"stage": "dominate"})
    else:
        anchors = tuple(sorted(set(int(v) for v in dominating_set)))
        if any(not 0 <= v < g.n for v in anchors):
            raise PreconditionError("INVALID_VERTEX: dominating set has out-of-range vertices")
        missing = undominated_vertices(g, anchors)
        if missing:
            raise PreconditionError(
                f"NOT_DOMINATING: supplied set leaves vertices {missing[:10]} undominated"
            )

    k = len(anchors)
    check_target_growth((2, 1) if k else (1, 0), t, max(k - 1, 0), size_cap)
    gamma, images = dominated_homomorphism(g, range(g.n), anchors, t)
    mapping = VertexMap(g.n, gamma.n, tuple(images[v] for v in range(g.n)))
    bound = thm15_bound(k, t)
    claims = _certify(
        g, gamma, mapping, t, pipeline="thm15", k=k, size_bound=bound,
        size_bound_expr=f"3(t+1)^(k-1)-1 = {bound}", dominating_set_size=k,
        warnings=warnings,
    )
    return HomCertificate(gamma, mapping, claims)


def cor16_pipeline(
    g: Graph,
    t: int,
    delta: float,
    d_cap: int = DEFAULT_VC_CAP,
    size_cap: int = DEFAULT_SIZE_CAP,
) -> HomCertificate:
    if not 0 < delta <= 1:
        raise PreconditionError(f"INVALID_DELTA: delta={delta} outside (0,1]")
    threshold = delta * g.n
    for v in range(g.n):
        if g.degree(v) < threshold - TOLERANCE:
            raise PreconditionError(
                f"MIN_DEGREE_PRECONDITION: vertex {v} has degree {g.degree(v)} "
                f"< delta*n = {threshold:.6g}"
            )
    require_odd_girth(g, 2 * t + 5, "net-domination pipeline")
    net = greedy_epsilon_net(g, delta)
    if undominated_vertices(g, net):
        raise InternalConsistencyError("INTERNAL_NET_DOMINATION: net does not dominate")
    vc = vc_dimension(g, d_cap)
    bound = epsilon_net_size_bound(vc.dimension, delta)
    warnings: list[str] = []
    if not vc.at_cap and len(net) > bound:
        warnings.append(f"net size {len(net)} exceeds (8d/delta)log(8d/delta) = {bound:.6g}")
        logger.warning("Greedy net above the VC size bound", extra={"stage": "net"})

    cert = thm15_pipeline(g, t, dominating_set=net, size_cap=size_cap)
    claims = cert.claims.model_copy(
        update={
            "pipeline": "cor16",
            "vc_dimension": vc.render(),
            "net_size_bound": bound,
            "warnings": [*cert.claims.warnings, *warnings],
        }
    )
    return HomCertificate(cert.target, cert.map, claims)
