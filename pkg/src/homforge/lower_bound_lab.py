"""Witness generators and the measurable quantities behind the exponential lower bound.

Nothing here asserts the asymptotic statements; the lab builds witnesses, verifies the
structural claims that are checkable at desk scale, and reports the entropy and
bad-edge quantities so the inequality chain can be traced numerically.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.special import entr

from homforge.failure_taxonomy import (
    InternalConsistencyError,
    PreconditionError,
    ResourceCapError,
)
from homforge.graph_core import (
    DEFAULT_HOM_BUDGET,
    Graph,
    VertexMap,
    _edge,
    count_violations,
    girth,
    is_hom_free,
    is_odd_cycle,
    odd_girth,
)
from homforge.hypergraphs import (
    Hypergraph,
    decorate_with_f,
    random_high_girth_hypergraph,
    shortest_berge_cycle,
)
from homforge.metrics import SEARCH_NODES
from homforge.star_construction import (
    LabelledCopy,
    StarGraph,
    StarLabelling,
    build_star,
    enumerate_f_copies,
    star_projection,
)
from homforge.types import (
    Caps,
    DensityMode,
    EntropySummary,
    HomFreeness,
    WitnessMode,
    WitnessReport,
)

logger = logging.getLogger(__name__)

ENTROPY_TOLERANCE = 1e-9
INVERSE_TOLERANCE = 1e-12
EXACT_ENTROPY_LIMIT = 1 << 20
WITNESS_EDGE_CONSTANT = 4.0
_MAP_CHUNK = 1 << 16


def binary_entropy(p):
    """H(Ber(p)) in bits; accepts scalars or arrays."""
    values = (entr(p) + entr(1.0 - np.asarray(p, dtype=float))) / math.log(2)
    return float(values) if np.ndim(values) == 0 else values


def h_inverse(x):
    """The p in [0, 1/2] with H(Ber(p)) = x, by vectorized bisection."""
    target = np.asarray(x, dtype=float)
    if np.any(target < 0.0) or np.any(target > 1.0) or np.any(np.isnan(target)):
        raise PreconditionError("INVALID_ENTROPY: h_inverse needs arguments in [0,1]")
    lo = np.zeros_like(target)
    hi = np.full_like(target, 0.5)
    for _ in range(100):
        mid = (lo + hi) / 2
        below = binary_entropy(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    result = (lo + hi) / 2
    result = np.where(target == 0.0, 0.0, np.where(target == 1.0, 0.5, result))
    return float(result) if np.ndim(result) == 0 else result


def lemma41_bound(k: int, beta: float) -> float:
    """Lower bound on every outcome probability of a k-valued X with H(X) >= log2 k - beta."""
    if k < 2:
        raise PreconditionError(f"INVALID_OUTCOMES: need at least 2 outcomes, got {k}")
    argument = math.log2(k / (k - 1)) - beta
    return 0.0 if argument <= 0 else float(h_inverse(min(argument, 1.0)))


@dataclass(frozen=True)
class OutcomeCheck:
    entropy: float
    applicable: bool
    min_probability: float
    bound: float
    holds: bool


def _entropy_bits(probs: np.ndarray) -> float:
    return float(entr(probs).sum() / math.log(2))


def min_outcome_check(probs: Sequence[float], beta: float) -> OutcomeCheck:
    values = np.asarray(probs, dtype=float)
    if values.ndim != 1 or values.size < 2 or np.any(values < 0):
        raise PreconditionError("INVALID_DISTRIBUTION: need a probability vector of length >= 2")
    if abs(values.sum() - 1.0) > ENTROPY_TOLERANCE:
        raise PreconditionError(f"INVALID_DISTRIBUTION: probabilities sum to {values.sum()}")
    k = values.size
    entropy = _entropy_bits(values)
    applicable = entropy >= math.log2(k) - beta
    bound = lemma41_bound(k, beta)
    low = float(values.min())
    return OutcomeCheck(
        entropy, applicable, low, bound, not applicable or low >= bound - INVERSE_TOLERANCE
    )


@dataclass(frozen=True)
class VertexEntropy:
    base: int
    entropy: float
    information: float
    coordinate_information: tuple[float, ...]


@dataclass(frozen=True)
class EntropyReport:
    vertices: tuple[VertexEntropy, ...]
    copy_information: tuple[float, ...]
    summary: EntropySummary


def _plugin_entropy(labels: np.ndarray) -> float:
    _, counts = np.unique(labels, axis=0, return_counts=True)
    return _entropy_bits(counts / counts.sum())


def _joint_entropy(left: np.ndarray, right: np.ndarray) -> float:
    return _plugin_entropy(np.stack([left, right], axis=1).astype(np.int64))


def entropy_diagnostics(
    labelling: StarLabelling,
    phi: VertexMap,
    mode: DensityMode = DensityMode.EXACT,
    *,
    copies: Sequence[LabelledCopy] = (),
    seed: int | None = None,
    samples: int = 100_000,
    exact_limit: int = EXACT_ENTROPY_LIMIT,
    allow_mc: bool = False,
) -> EntropyReport:
    """Per base vertex v: H(y), I(x; y) and I(x_k; y) for y = phi(v, x), x uniform."""
    if phi.source_n != labelling.size:
        raise PreconditionError(
            f"DIMENSION_MISMATCH: map covers {phi.source_n} vertices, labels {labelling.size}"
        )
    block = labelling.delta**labelling.m
    if mode is DensityMode.EXACT and block > exact_limit:
        if not allow_mc:
            raise ResourceCapError(
                f"CAP_ENTROPY_ENUMERATION: Δ^m = {block} exceeds exact limit {exact_limit}"
            )
        mode = DensityMode.MC
    rng = None
    if mode is DensityMode.MC:
        if seed is None:
            raise PreconditionError("SEED_REQUIRED: sampled entropies need an explicit seed")
        rng = np.random.default_rng(seed)

    image = np.asarray(phi.image, dtype=np.int64)
    rows: list[VertexEntropy] = []
    identity_ok = superadditive = True
    for base, members in labelling.classes().items():
        coords = labelling.coords[members]
        if len({tuple(row) for row in coords.tolist()}) != block or members.size != block:
            raise PreconditionError(
                f"INVALID_LABEL: base vertex {base} does not carry every label tuple once"
            )
        if rng is not None:
            members = rng.choice(members, size=samples)
            coords = labelling.coords[members]
        ys = image[members]
        xs = members
        h_y = _plugin_entropy(ys)
        h_x = _plugin_entropy(xs)
        # y is a function of x, so H(x, y) = H(x) and I(x; y) = H(y)
        information = (h_x - _joint_entropy(xs, ys)) + h_y
        per_coordinate = tuple(
            _plugin_entropy(coords[:, k]) + h_y - _joint_entropy(coords[:, k], ys)
            for k in range(labelling.m)
        )
        if abs(information - h_y) > ENTROPY_TOLERANCE:
            identity_ok = False
        if sum(per_coordinate) > information + ENTROPY_TOLERANCE:
            superadditive = False
        rows.append(VertexEntropy(base, h_y, information, per_coordinate))

    by_base = {row.base: row for row in rows}
    copy_information = tuple(
        sum(by_base[v].coordinate_information[copy.index] for v in copy.vertices if v in by_base)
        for copy in copies
    )
    total = sum(row.information for row in rows)
    summary = EntropySummary(
        base_vertices=len(rows),
        copies=labelling.m,
        max_label=labelling.delta,
        mode=mode.value,
        total_information=total,
        max_information=max((row.information for row in rows), default=0.0),
        superadditivity_ok=superadditive,
        identity_ok=identity_ok,
    )
    if mode is DensityMode.EXACT and not (identity_ok and superadditive):
        raise InternalConsistencyError(
            "INTERNAL_ENTROPY_IDENTITY: exact tabulation broke an identity"
        )
    return EntropyReport(tuple(rows), copy_information, summary)


@dataclass(frozen=True)
class BadEdgeCount:
    copy: int
    edge: tuple[int, int]
    bad: int
    fraction: float


@dataclass(frozen=True)
class BadEdgeAccounting:
    per_edge: tuple[BadEdgeCount, ...]
    per_copy: tuple[int, ...]
    class_sizes: dict[int, dict[int, int]] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.per_copy)


def bad_edge_accounting(star: StarGraph, phi: VertexMap, gamma: Graph) -> BadEdgeAccounting:
    """Per copy and per copy edge uv, star edges between V_u and V_v mapped to non-edges."""
    if phi.source_n != star.graph.n or phi.target_n != gamma.n:
        raise PreconditionError("DIMENSION_MISMATCH: map does not go from the star graph to gamma")
    bad: Counter[tuple[int, int]] = Counter()
    for a, b in phi.violation_stats(star.graph, gamma).violated:
        bad[_edge(star.base_vertex(a), star.base_vertex(b))] += 1
    per_edge: list[BadEdgeCount] = []
    per_copy = [0] * star.m
    pair_size = star.block**2
    for copy in star.copies:
        for edge in sorted(copy.edges):
            count = bad.get(edge, 0)
            per_edge.append(BadEdgeCount(copy.index, edge, count, count / pair_size))
            per_copy[copy.index] += count
    class_sizes: dict[int, dict[int, int]] = {}
    for v in range(star.base.n):
        images = phi.image[v * star.block:(v + 1) * star.block]
        class_sizes[v] = dict(sorted(Counter(images).items()))
    return BadEdgeAccounting(tuple(per_edge), tuple(per_copy), class_sizes)


@dataclass(frozen=True)
class MinViolationResult:
    map: VertexMap
    violations: int
    method: str
    nodes: int = 0


def _brute_force(g: Graph, gamma: Graph) -> MinViolationResult:
    q, n = gamma.n, g.n
    non_edge = 1 - gamma.adjacency_matrix()
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    edges = np.array(g.sorted_edges, dtype=np.int64).reshape(-1, 2)
    best_count, best_index = None, 0
    total = q**n
    for start in range(0, total, _MAP_CHUNK):
        indices = np.arange(start, min(start + _MAP_CHUNK, total), dtype=np.int64)
        images = (indices[:, None] // powers) % q
        counts = non_edge[images[:, edges[:, 0]], images[:, edges[:, 1]]].sum(axis=1)
        position = int(np.argmin(counts))
        if best_count is None or counts[position] < best_count:
            best_count, best_index = int(counts[position]), int(indices[position])
    image = tuple(int(d) for d in (best_index // powers) % q)
    return MinViolationResult(VertexMap(n, q, image), best_count or 0, "brute-force", total)


def _branch_and_bound(g: Graph, gamma: Graph, node_budget: int) -> MinViolationResult:
    q, n = gamma.n, g.n
    non_edge = 1 - gamma.adjacency_matrix()
    earlier = [sorted(u for u in g.neighbors(v) if u < v) for v in range(n)]
    image = [-1] * n
    best = [g.edge_count + 1, None]
    nodes = 0

    def lower_bound(depth: int) -> int:
        total = 0
        for u in range(depth, n):
            fixed = [image[w] for w in g.neighbors(u) if w < depth]
            if fixed:
                total += int(non_edge[:, fixed].sum(axis=1).min())
        return total

    def descend(depth: int, cost: int) -> None:
        nonlocal nodes
        if depth == n:
            if cost < best[0]:
                best[0], best[1] = cost, tuple(image)
            return
        for y in range(q):
            nodes += 1
            if nodes > node_budget:
                raise ResourceCapError(
                    f"BUDGET_MIN_VIOLATION: branch and bound exceeded {node_budget} nodes "
                    f"({q}^{n} maps)"
                )
            added = sum(int(non_edge[y, image[w]]) for w in earlier[depth])
            image[depth] = y
            if cost + added + lower_bound(depth + 1) < best[0]:
                descend(depth + 1, cost + added)
            image[depth] = -1

    descend(0, 0)
    SEARCH_NODES.labels(search="min_violation").inc(nodes)
    assert best[1] is not None
    return MinViolationResult(VertexMap(n, q, best[1]), int(best[0]), "branch-and-bound", nodes)


def min_violation_map(
    g: Graph,
    gamma: Graph,
    cap: int = 10_000_000,
    node_budget: int = 5_000_000,
    method: str = "auto",
) -> MinViolationResult:
    """Exact minimum of count_violations over all maps.

    Ties go to the lexicographically least image tuple.
    """
    if g.n == 0:
        return MinViolationResult(VertexMap(0, gamma.n, ()), 0, "trivial")
    if gamma.n == 0:
        raise PreconditionError("NOT_MAPPABLE: no map from a nonempty graph into an empty one")
    if method == "brute-force" or (method == "auto" and gamma.n**g.n <= cap):
        if gamma.n**g.n > cap:
            raise ResourceCapError(f"CAP_MIN_VIOLATION: {gamma.n}^{g.n} maps exceed cap {cap}")
        return _brute_force(g, gamma)
    return _branch_and_bound(g, gamma, node_budget)


@dataclass(frozen=True)
class WitnessBundle:
    graph: Graph
    report: WitnessReport
    hypergraph: Hypergraph | None = None
    star: StarGraph | None = None
    copies: tuple[LabelledCopy, ...] = ()

    @property
    def output_graph(self) -> Graph:
        return self.star.graph if self.star is not None else self.graph


def _is_two_connected(f: Graph) -> bool:
    return f.n >= 3 and nx.is_biconnected(f.to_networkx())


def _pattern_freeness(
    host: Graph, h: Graph, host_odd_girth: int | None, budget: int
) -> HomFreeness:
    if is_odd_cycle(h):
        free = host_odd_girth is None or host_odd_girth > h.n
        return HomFreeness.FREE if free else HomFreeness.NOT_FREE
    return is_hom_free(host, h, budget)


def _pulled_back_base_violations(star: StarGraph, gamma: Graph, caps: Caps) -> int | None:
    """Violations of the best base-graph map composed with the projection G★ -> G."""
    try:
        base = min_violation_map(star.base, gamma, caps.mvm_cap, caps.mvm_node_budget)
    except ResourceCapError:
        return None
    return count_violations(star_projection(star).then(base.map), star.graph, gamma)


def thm113_witness(
    f: Graph,
    h: Graph,
    eps: float,
    seed: int,
    caps: Caps | None = None,
    *,
    n: int | None = None,
    c: float | None = None,
    candidates: Sequence[Graph] = (),
) -> WitnessBundle:
    caps = caps or Caps()
    if not _is_two_connected(f):
        raise PreconditionError("NOT_2_CONNECTED: F must be 2-connected to decorate hyperedges")
    if not 0 < eps <= 1:
        raise PreconditionError(f"INVALID_EPS: eps={eps} outside (0,1]")
    girth_parameter = max(f.n, h.n)
    n = n if n is not None else max(2 * f.n, round(1 / eps))
    c = WITNESS_EDGE_CONSTANT if c is None else c
    warnings: list[str] = []

    hyper = random_high_girth_hypergraph(n, f.n, girth_parameter, seed, c=c)
    sampled = hyper.edge_count
    if sampled > caps.witness_max_copies:
        kept = hyper.sorted_edges[: caps.witness_max_copies]
        hyper = Hypergraph(hyper.n, frozenset(kept), hyper.f, hyper.parts)
        warnings.append(f"kept the first {len(kept)} of {sampled} hyperedges")
    berge_ok = shortest_berge_cycle(hyper, girth_parameter) is None

    decorated = decorate_with_f(hyper, f)
    enumeration = enumerate_f_copies(decorated, f)
    if not enumeration.unique_cover:
        raise InternalConsistencyError(
            f"INTERNAL_UNIQUE_COVER: edges {list(enumeration.multiply_covered)[:5]} lie in "
            "several copies"
        )
    star = build_star(decorated, enumeration.copies, f, caps.size_cap)
    star_girth = odd_girth(star.graph)
    freeness = _pattern_freeness(star.graph, h, star_girth, caps.hom_budget)
    if freeness is HomFreeness.NOT_FREE:
        raise InternalConsistencyError("INTERNAL_STAR_NOT_FREE: star graph admits H")
    if freeness is HomFreeness.UNKNOWN:
        warnings.append("H-hom-freeness of the star graph undecided within budget")

    minima: list[str] = []
    for index, gamma in enumerate(candidates):
        try:
            result = min_violation_map(star.graph, gamma, caps.mvm_cap, caps.mvm_node_budget)
        except ResourceCapError as exc:
            minima.append(f"candidate {index}: declined ({exc.code})")
            continue
        accounting = bad_edge_accounting(star, result.map, gamma)
        line = (
            f"candidate {index}: min violations {result.violations} ({result.method}), "
            f"bad edges per copy {list(accounting.per_copy)}"
        )
        pulled = _pulled_back_base_violations(star, gamma, caps)
        if pulled is not None:
            if result.violations > pulled:
                raise InternalConsistencyError(
                    f"INTERNAL_MIN_VIOLATION: minimum {result.violations} exceeds the "
                    f"pulled-back base map's {pulled}"
                )
            line += f", base map pulled back {pulled}"
        minima.append(line)

    m, size = star.m, star.graph.n
    report = WitnessReport(
        mode=WitnessMode.THM113.value,
        f_vertices=f.n,
        h_vertices=h.n,
        girth_parameter=girth_parameter,
        eps=eps,
        seed=seed,
        n=n,
        hyperedges=sampled,
        hyperedges_used=hyper.edge_count,
        berge_girth_ok=berge_ok,
        unique_cover=enumeration.unique_cover,
        star_vertices=size,
        star_edges=star.graph.edge_count,
        star_odd_girth=star_girth,
        pattern_freeness=freeness.value,
        eps_threshold_expr=f"c*m/n^2 = c*{m}/{n}^2",
        size_bound_expr=f"2^(c*m/n) = 2^(c*{m}/{n})",
        candidate_minimum=minima,
        warnings=warnings,
    )
    logger.info(
        "Witness bundle assembled",
        extra={"stage": "witness", "detail": f"m={m} star={size} odd_girth={star_girth}"},
    )
    return WitnessBundle(decorated, report, hyper, star, enumeration.copies)


def prop51_witness(
    f: Graph,
    h: Graph,
    eps: float,
    seed: int,
    retries: int = 8,
    budget: int = DEFAULT_HOM_BUDGET,
) -> WitnessBundle:
    """Random graph at p = n^(-1+1/g)/(4g) with every cycle of length <= g broken."""
    if not 0 < eps <= 1:
        raise PreconditionError(f"INVALID_EPS: eps={eps} outside (0,1]")
    g_len = odd_girth(h)
    if g_len is None:
        raise PreconditionError("PRECONDITION_BIPARTITE: H is bipartite, so one vertex suffices")
    n = max(1, round(1 / eps))
    p = min(1.0, n ** (-1 + 1 / g_len) / (4 * g_len))

    for attempt, child in enumerate(np.random.SeedSequence(seed).spawn(retries)):
        sample = nx.gnp_random_graph(n, p, seed=int(child.generate_state(1)[0]))
        while (cycle := next(nx.chordless_cycles(sample, length_bound=g_len), None)) is not None:
            sample.remove_node(min(cycle))
        if sample.number_of_nodes() * 2 >= n:
            break
        logger.info("Too few vertices survived, resampling", extra={"stage": "prop51"})
    else:
        raise ResourceCapError(f"BUDGET_RETRIES: {retries} samples kept fewer than n/2 vertices")

    order = sorted(sample.nodes)
    index = {v: i for i, v in enumerate(order)}
    graph = Graph.from_edges(len(order), ((index[u], index[v]) for u, v in sample.edges))
    cycle_length = girth(graph)
    if cycle_length is not None and cycle_length <= g_len:
        raise InternalConsistencyError(f"INTERNAL_GIRTH: cycle of length {cycle_length} survived")
    graph_odd_girth = odd_girth(graph)
    freeness = _pattern_freeness(graph, h, graph_odd_girth, budget)
    if freeness is HomFreeness.NOT_FREE:
        raise InternalConsistencyError("INTERNAL_WITNESS_NOT_FREE: sampled graph admits H")
    report = WitnessReport(
        mode=WitnessMode.PROP51.value,
        f_vertices=f.n,
        h_vertices=h.n,
        girth_parameter=g_len,
        eps=eps,
        seed=seed,
        n=n,
        hyperedges=0,
        hyperedges_used=0,
        berge_girth_ok=True,
        unique_cover=True,
        star_vertices=graph.n,
        star_edges=graph.edge_count,
        star_odd_girth=graph_odd_girth,
        pattern_freeness=freeness.value,
        eps_threshold_expr=f"eps = 1/n = {1 / n:.6g}",
        size_bound_expr=f"c*sqrt(p)*n = c*{math.sqrt(p) * n:.6g}",
        warnings=[f"accepted sample {attempt + 1} of {retries}"] if attempt else [],
    )
    return WitnessBundle(graph, report)
