"""Approximate homomorphisms into small pattern-free targets.

Two compressors live here: the weak-regularity route, which thresholds a reduced graph
and prunes it to an F-hom-free subgraph, and the vertex-pullout route, which collapses
neighbourhood chunks of high-degree vertices. Every emitted map is re-counted exactly.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass

from pydantic import BaseModel

from homforge.failure_taxonomy import (
    InternalConsistencyError,
    PreconditionError,
    ResourceCapError,
)
from homforge.graph_core import (
    DEFAULT_HOM_BUDGET,
    TOLERANCE,
    Graph,
    VertexMap,
    _edge,
    count_violations,
    cycle_graph,
    edgeless_graph,
    find_homomorphism,
    is_hom_free,
    odd_girth_up_to,
    shortest_odd_cycle,
    two_subdivision,
)
from homforge.regularity import RegularityResult, fk_partition, reduced_graph
from homforge.threshold_pipelines import (
    DEFAULT_SIZE_CAP,
    check_target_growth,
    check_target_odd_girth,
    dominated_homomorphism,
    require_odd_girth,
    thm15_bound,
)
from homforge.types import (
    ApproxHomReport,
    ApproxRoute,
    HomFreeness,
    Prop18Report,
    SearchStatus,
    SubgraphMode,
    Thm110Report,
)

logger = logging.getLogger(__name__)

EXACT_SUBGRAPH_EDGE_LIMIT = 20


@dataclass(frozen=True)
class PulloutDecomposition:
    n: int
    eps: float
    set_size: int
    centers: tuple[int, ...]
    sets: tuple[tuple[int, ...], ...]
    leftover: frozenset[int]

    @property
    def k(self) -> int:
        return len(self.sets)

    def part_of(self) -> tuple[int, ...]:
        """0 for the leftover X, i + 1 for vertices of S_i."""
        owner = [0] * self.n
        for index, members in enumerate(self.sets):
            for v in members:
                owner[v] = index + 1
        return tuple(owner)


@dataclass(frozen=True)
class ApproxHomResult:
    target: Graph
    map: VertexMap
    report: BaseModel
    regularity: RegularityResult | None = None
    decomposition: PulloutDecomposition | None = None


def _is_triangle(f: Graph) -> bool:
    return f.n == 3 and f.edge_count == 3


def max_hom_free_subgraph(
    gamma0: Graph,
    f: Graph,
    mode: SubgraphMode = SubgraphMode.EXACT,
    budget: int = DEFAULT_HOM_BUDGET,
) -> Graph:
    if f.edge_count == 0 and f.n > 0 and gamma0.n > 0:
        raise PreconditionError(
            "NOT_REMOVABLE: a pattern without edges maps into every nonempty graph"
        )
    if mode is SubgraphMode.EXACT and gamma0.edge_count > EXACT_SUBGRAPH_EDGE_LIMIT:
        raise ResourceCapError(
            f"CAP_EXACT_SUBGRAPH: {gamma0.edge_count} edges exceed exact limit "
            f"{EXACT_SUBGRAPH_EDGE_LIMIT}"
        )

    def image_edges(edges: frozenset[tuple[int, int]]) -> list[tuple[int, int]] | None:
        result = find_homomorphism(f, Graph(gamma0.n, edges), budget)
        if result.status is SearchStatus.UNKNOWN:
            raise ResourceCapError("BUDGET_HOM_SEARCH: pattern search exhausted its budget")
        if result.mapping is None:
            return None
        m = result.mapping
        return [_edge(m(u), m(v)) for u, v in f.sorted_edges]

    if mode is SubgraphMode.GREEDY:
        edges = gamma0.edges
        while (hits := image_edges(edges)) is not None:
            counts = Counter(hits)
            victim = min(counts, key=lambda e: (-counts[e], e))
            edges = edges - {victim}
        return Graph(gamma0.n, edges)

    # every F-free subgraph misses an edge of each homomorphic image, so branching on the
    # image edges of one found copy with iterative deepening gives a maximum subgraph
    dead: set[tuple[frozenset[tuple[int, int]], int]] = set()

    def search(edges: frozenset[tuple[int, int]], left: int) -> frozenset[tuple[int, int]] | None:
        if (edges, left) in dead:
            return None
        hits = image_edges(edges)
        if hits is None:
            return edges
        if left > 0:
            for e in sorted(set(hits)):
                found = search(edges - {e}, left - 1)
                if found is not None:
                    return found
        dead.add((edges, left))
        return None

    for deletions in range(gamma0.edge_count + 1):
        found = search(gamma0.edges, deletions)
        if found is not None:
            return Graph(gamma0.n, found)
    raise InternalConsistencyError("INTERNAL_SUBGRAPH_SEARCH: edgeless subgraph not F-free")


def verify_approx_hom(
    g: Graph,
    gamma: Graph,
    mapping: VertexMap,
    eps: float,
    f: Graph,
    budget: int = DEFAULT_HOM_BUDGET,
) -> ApproxHomReport:
    if mapping.source_n != g.n or mapping.target_n != gamma.n:
        raise PreconditionError(
            f"DIMENSION_MISMATCH: map is {mapping.source_n}->{mapping.target_n}, "
            f"graphs have {g.n} and {gamma.n} vertices"
        )
    if eps < 0:
        raise PreconditionError(f"INVALID_EPS: eps={eps} is negative")
    violations = count_violations(mapping, g, gamma)
    threshold = eps * g.n**2
    return ApproxHomReport(
        n=g.n,
        edges=g.edge_count,
        target_vertices=gamma.n,
        eps=eps,
        violations=violations,
        threshold=threshold,
        passed=violations <= threshold + TOLERANCE,
        pattern_freeness=is_hom_free(gamma, f, budget).value,
    )


def prop18_pipeline(
    g: Graph,
    f: Graph,
    h: Graph,
    eps: float,
    m_override: int | None = None,
    *,
    delta_value: float | None = None,
    seed: int | None = None,
    subgraph_mode: SubgraphMode | None = None,
    budget: int = DEFAULT_HOM_BUDGET,
) -> ApproxHomResult:
    """Regularity route. Without ``delta_value`` the part count K takes delta(eps/2) = 1,
    the smallest K the bound allows; pass ``m_override`` or ``delta_value`` to go beyond it.
    """
    if not 0 < eps <= 1:
        raise PreconditionError(f"INVALID_EPS: eps={eps} outside (0,1]")
    warnings: list[str] = []
    host = is_hom_free(g, h, budget)
    if host is HomFreeness.NOT_FREE:
        witness = find_homomorphism(h, g, budget).mapping
        detail = list(witness.image) if witness is not None else "odd cycle"
        raise PreconditionError(f"NOT_HOM_FREE: input admits a homomorphism from H: {detail}")
    if host is HomFreeness.UNKNOWN:
        warnings.append("H-hom-freeness of the input undecided within budget")
        logger.warning(
            "Host freeness unknown", extra={"stage": "prop18", "code": "BUDGET_HOM_SEARCH"}
        )

    e_h = h.edge_count
    k_low = 5 * e_h * (2 / eps) ** e_h
    k_expr = f"5*{e_h}*(2/{eps:g})^{e_h}/delta(eps/2)"
    if delta_value is not None:
        if not 0 < delta_value <= 1:
            raise PreconditionError(f"INVALID_DELTA: delta(eps/2)={delta_value} outside (0,1]")
        k_low /= delta_value
        k_expr += f" = {k_low:.6g}"
    else:
        k_expr += f" with delta = 1 = {k_low:.6g}"
        if m_override is None:
            warnings.append("delta(eps/2) not given, K uses delta = 1 as a lower bound")
    m_theory = "2^(K^2)"

    if g.n == 0:
        target = edgeless_graph(1)
        report = Prop18Report(
            n=0, edges=0, eps=eps, parts=0, k_expr=k_expr, m_theory=m_theory,
            fk_converged=True, gamma0_edges=0, gamma_edges=0,
            subgraph_mode=(subgraph_mode or SubgraphMode.EXACT).value,
            host_freeness=host.value, pattern_freeness=HomFreeness.FREE.value,
            violations=0, within_part=0, low_density=0, deleted_pairs=0,
            threshold=0.0, passed=True, warnings=warnings,
        )
        return ApproxHomResult(target, VertexMap(0, 1, ()), report)

    if m_override is not None:
        if not 1 <= m_override <= g.n:
            raise PreconditionError(f"PRECONDITION_PARTS: M={m_override} outside [1, n={g.n}]")
        parts = m_override
    elif k_low**2 < math.log2(g.n):
        parts = int(2 ** (k_low**2))
    else:
        parts = g.n

    regularity = fk_partition(g, parts, test_family=(h,), seed=seed)
    if not regularity.converged:
        warnings.append(f"cut refinement stopped at discrepancy {regularity.discrepancy:.6g}")
    for check in regularity.checks:
        if not check.holds:
            warnings.append(
                f"counting check failed: |{check.density_graph:.6g} - "
                f"{check.density_partition:.6g}| > {check.bound:.6g}"
            )
    reduced = reduced_graph(g, regularity.partition)
    gamma0 = Graph.from_edges(
        parts,
        [
            (i, j)
            for i in range(parts)
            for j in range(i + 1, parts)
            if reduced.weight(i, j) >= eps / 2 - TOLERANCE
        ],
    )
    mode = subgraph_mode or (
        SubgraphMode.EXACT
        if gamma0.edge_count <= EXACT_SUBGRAPH_EDGE_LIMIT
        else SubgraphMode.GREEDY
    )
    gamma = max_hom_free_subgraph(gamma0, f, mode, budget)
    freeness = is_hom_free(gamma, f, budget)
    if freeness is HomFreeness.UNKNOWN:
        raise ResourceCapError("BUDGET_PATTERN_FREENESS: F-hom-freeness of the target undecided")
    if freeness is HomFreeness.NOT_FREE:
        raise InternalConsistencyError("INTERNAL_TARGET_NOT_FREE: pruned target admits F")

    mapping = regularity.partition.projection()
    within = low = deleted = 0
    for u, v in mapping.violation_stats(g, gamma).violated:
        pu, pv = mapping(u), mapping(v)
        if pu == pv:
            within += 1
        elif not gamma0.has_edge(pu, pv):
            low += 1
        else:
            deleted += 1
    violations = count_violations(mapping, g, gamma)
    if within + low + deleted != violations:
        raise InternalConsistencyError("INTERNAL_VIOLATION_SPLIT: decomposition does not sum")
    threshold = eps * g.n**2
    report = Prop18Report(
        n=g.n,
        edges=g.edge_count,
        eps=eps,
        parts=parts,
        k_expr=k_expr,
        m_theory=m_theory,
        fk_converged=regularity.converged,
        gamma0_edges=gamma0.edge_count,
        gamma_edges=gamma.edge_count,
        subgraph_mode=mode.value,
        host_freeness=host.value,
        pattern_freeness=freeness.value,
        violations=violations,
        within_part=within,
        low_density=low,
        deleted_pairs=deleted,
        threshold=threshold,
        passed=violations <= threshold + TOLERANCE,
        warnings=warnings,
    )
    logger.info(
        "Regularity route finished",
        extra={"stage": "prop18", "detail": f"M={parts} violations={violations}"},
    )
    return ApproxHomResult(gamma, mapping, report, regularity=regularity)


def _incident_count(g: Graph, region: set[int]) -> tuple[int, int]:
    """Edges with at least one endpoint in ``region`` and edges inside it."""
    incident = inside = 0
    for u, v in g.edges:
        a, b = u in region, v in region
        if a or b:
            incident += 1
            if a and b:
                inside += 1
    return incident, inside


def verify_pullout(g: Graph, dec: PulloutDecomposition) -> list[str]:
    problems: list[str] = []
    seen: set[int] = set()
    for center, members in zip(dec.centers, dec.sets):
        if len(members) != dec.set_size:
            problems.append(f"set of center {center} has {len(members)} != {dec.set_size}")
        if seen.intersection(members):
            problems.append(f"set of center {center} overlaps an earlier set")
        seen.update(members)
        if any(not g.has_edge(center, v) for v in members):
            problems.append(f"center {center} misses part of its set")
    if dec.leftover != frozenset(range(g.n)) - seen:
        problems.append("leftover is not the complement of the sets")
    incident, _ = _incident_count(g, set(dec.leftover))
    if incident > dec.eps * g.n**2 / 2 + TOLERANCE:
        problems.append(f"{incident} edges touch the leftover, above eps*n^2/2")
    if dec.k > 3 / dec.eps + TOLERANCE:
        problems.append(f"k={dec.k} exceeds 3/eps")
    return problems


def pullout(g: Graph, eps: float) -> PulloutDecomposition:
    if not 0 < eps <= 1:
        raise PreconditionError(f"INVALID_EPS: eps={eps} outside (0,1]")
    n = g.n
    size = max(1, math.ceil(eps * n / 3 - TOLERANCE))
    leftover = set(range(n))
    centers: list[int] = []
    sets: list[tuple[int, ...]] = []
    while True:
        incident, inside = _incident_count(g, leftover)
        if incident <= eps * n * n / 2 + TOLERANCE:
            break
        # plenty of edges inside X: pull from X, otherwise from the pulled-out side
        if inside >= eps * n * n / 6 - TOLERANCE:
            pool = sorted(leftover)
        else:
            pool = sorted(set(range(n)) - leftover)
        center = max(pool, key=lambda u: (len(g.neighbors(u) & leftover), -u))
        nbrs = sorted(g.neighbors(center) & leftover)
        if len(nbrs) < size:
            raise InternalConsistencyError(
                f"INTERNAL_PULLOUT: center {center} has {len(nbrs)} < {size} neighbours in X"
            )
        chosen = tuple(nbrs[:size])
        centers.append(center)
        sets.append(chosen)
        leftover.difference_update(chosen)

    dec = PulloutDecomposition(n, eps, size, tuple(centers), tuple(sets), frozenset(leftover))
    problems = verify_pullout(g, dec)
    if problems:
        raise InternalConsistencyError(f"INTERNAL_PULLOUT: {'; '.join(problems)}")
    return dec


def lift_subdivision_witness(
    g: Graph, dec: PulloutDecomposition, f: Graph, psi: VertexMap
) -> VertexMap:
    """Turn a homomorphism F -> Γ of the pullout target into a homomorphism F•• -> g."""
    if psi.source_n != f.n or psi.target_n != dec.k + 1:
        raise PreconditionError("DIMENSION_MISMATCH: psi must map F into the pullout target")
    fallback = 0 if g.n else None
    image: list[int] = []
    for a in range(f.n):
        part = psi(a)
        if part == 0:
            if f.degree(a) or fallback is None:
                raise PreconditionError(f"NOT_LIFTABLE: vertex {a} maps to the isolated x")
            image.append(fallback)
        else:
            image.append(dec.centers[part - 1])
    for a, b in f.sorted_edges:
        left, right = dec.sets[psi(a) - 1], dec.sets[psi(b) - 1]
        pair = next(((x, y) for x in left for y in right if g.has_edge(x, y)), None)
        if pair is None:
            raise PreconditionError(f"NOT_LIFTABLE: no edge between the sets of ({a},{b})")
        image.extend(pair)
    sub = two_subdivision(f)
    lifted = VertexMap(sub.n, g.n, tuple(image))
    if count_violations(lifted, sub, g):
        raise InternalConsistencyError("INTERNAL_LIFT: lifted subdivision map violates edges")
    return lifted


def _require_subdivision_free(g: Graph, f: Graph, budget: int) -> None:
    if _is_triangle(f):
        # the 2-subdivision of K3 is C9, so freeness means odd girth at least 11
        if odd_girth_up_to(g, 9) is not None:
            cycle = shortest_odd_cycle(g, 9) or []
            raise PreconditionError(
                f"NOT_HOM_FREE: odd cycle of length {len(cycle)} receives the 2-subdivision "
                f"of K3: {cycle}"
            )
        return
    result = find_homomorphism(two_subdivision(f), g, budget)
    if result.status is SearchStatus.UNKNOWN:
        raise ResourceCapError("BUDGET_HOM_SEARCH: 2-subdivision search exhausted its budget")
    if result.mapping is not None:
        raise PreconditionError(
            f"NOT_HOM_FREE: 2-subdivision of F maps into the input: {list(result.mapping.image)}"
        )


def _pullout_report(
    route: ApproxRoute,
    g: Graph,
    eps: float,
    dec: PulloutDecomposition,
    gamma: Graph,
    mapping: VertexMap,
    target_bound: float,
    freeness: HomFreeness,
    threshold: float,
    warnings: list[str],
) -> Thm110Report:
    incident = within = 0
    owner = dec.part_of()
    for u, v in mapping.violation_stats(g, gamma).violated:
        if owner[u] == 0 or owner[v] == 0:
            incident += 1
        elif owner[u] == owner[v]:
            within += 1
    violations = count_violations(mapping, g, gamma)
    if incident + within != violations:
        raise InternalConsistencyError("INTERNAL_VIOLATION_SPLIT: edges between sets violated")
    return Thm110Report(
        route=route.value,
        n=g.n,
        edges=g.edge_count,
        eps=eps,
        k=dec.k,
        set_size=dec.set_size,
        k_bound=3 / eps,
        k_floor_bound=g.n // dec.set_size,
        target_vertices=gamma.n,
        target_bound=target_bound,
        incident_to_leftover=incident,
        within_sets=within,
        violations=violations,
        threshold=threshold,
        passed=violations <= threshold + TOLERANCE,
        pattern_freeness=freeness.value,
        warnings=warnings,
    )


def thm110_pipeline(
    g: Graph, f: Graph, eps: float, budget: int = DEFAULT_HOM_BUDGET
) -> ApproxHomResult:
    _require_subdivision_free(g, f, budget)
    dec = pullout(g, eps)
    pairs = set()
    owner = dec.part_of()
    for u, v in g.edges:
        if owner[u] and owner[v] and owner[u] != owner[v]:
            pairs.add(_edge(owner[u], owner[v]))
    gamma = Graph.from_edges(dec.k + 1, pairs)
    mapping = VertexMap(g.n, gamma.n, owner)

    freeness = is_hom_free(gamma, f, budget)
    if freeness is HomFreeness.NOT_FREE:
        psi = find_homomorphism(f, gamma, budget).mapping
        assert psi is not None
        witness = lift_subdivision_witness(g, dec, f, psi)
        raise InternalConsistencyError(
            f"INTERNAL_TARGET_NOT_FREE: target admits F; lifted witness {list(witness.image)}"
        )
    if freeness is HomFreeness.UNKNOWN:
        raise ResourceCapError("BUDGET_PATTERN_FREENESS: F-hom-freeness of the target undecided")

    report = _pullout_report(
        ApproxRoute.PULLOUT, g, eps, dec, gamma, mapping, 1 + 3 / eps, freeness,
        eps * g.n**2, [],
    )
    if gamma.n > report.target_bound + TOLERANCE or not report.passed:
        raise InternalConsistencyError(
            f"INTERNAL_PULLOUT_BOUNDS: |target|={gamma.n}, violations={report.violations}"
        )
    logger.info(
        "Pullout route finished",
        extra={"stage": "thm110", "detail": f"k={dec.k} violations={report.violations}"},
    )
    return ApproxHomResult(gamma, mapping, report, decomposition=dec)


def pullout_domination_route(
    g: Graph,
    eps: float,
    t: int = 1,
    size_cap: int = DEFAULT_SIZE_CAP,
    budget: int = DEFAULT_HOM_BUDGET,
) -> ApproxHomResult:
    """Leftover to one vertex; the pulled-out sets go through the domination recursion."""
    if t < 1:
        raise PreconditionError(f"PRECONDITION_T: t must be at least 1, got {t}")
    require_odd_girth(g, 2 * t + 5, "pullout-domination route")
    dec = pullout(g, eps)
    anchors = tuple(dict.fromkeys(dec.centers))
    active = [v for members in dec.sets for v in members]
    if anchors:
        check_target_growth((2, 1), t, len(anchors) - 1, size_cap)
    gamma, images = dominated_homomorphism(g, active, anchors, t)
    mapping = VertexMap(g.n, gamma.n, tuple(images.get(v, 0) for v in range(g.n)))

    _, girth_ok = check_target_odd_girth(gamma, 2 * t + 3)
    if not girth_ok:
        raise InternalConsistencyError("INTERNAL_TARGET_ODD_GIRTH: short odd cycle in target")
    freeness = is_hom_free(gamma, cycle_graph(2 * t + 1), budget)
    bound = thm15_bound(len(anchors), t)
    report = _pullout_report(
        ApproxRoute.PULLOUT_DOMINATION, g, eps, dec, gamma, mapping, bound, freeness,
        eps * g.n**2 / 2, [],
    )
    if report.within_sets or not report.passed or gamma.n > bound:
        raise InternalConsistencyError(
            f"INTERNAL_PULLOUT_BOUNDS: |target|={gamma.n}/{bound}, "
            f"violations={report.violations}"
        )
    return ApproxHomResult(gamma, mapping, report, decomposition=dec)
