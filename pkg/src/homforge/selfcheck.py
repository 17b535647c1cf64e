"""Desk-scale acceptance suites behind ``homforge selfcheck``."""

from __future__ import annotations

import itertools
import logging
import statistics
import time
from dataclasses import dataclass
from typing import Callable

import networkx as nx
import numpy as np

from homforge.approx_hom import prop18_pipeline, pullout, thm110_pipeline, verify_pullout
from homforge.failure_taxonomy import HomforgeError
from homforge.graph_core import (
    Graph,
    VertexMap,
    blowup,
    bowtie_graph,
    complete_graph,
    cycle_graph,
    find_homomorphism,
    odd_girth,
    odd_girth_up_to,
)
from homforge.hypergraphs import (
    Hypergraph,
    is_hyperforest,
    random_high_girth_hypergraph,
    shortest_berge_cycle,
)
from homforge.lower_bound_lab import (
    WITNESS_EDGE_CONSTANT,
    binary_entropy,
    entropy_diagnostics,
    h_inverse,
    min_violation_map,
    thm113_witness,
)
from homforge.metrics import record_stage
from homforge.mycielski import t_fold_mycielskian
from homforge.profile import SelfcheckProfile, SuiteParams
from homforge.star_construction import (
    audit_copy_bipartite,
    build_star,
    check_t_star_odd_girth,
    enumerate_f_copies,
    random_k3_forest,
)
from homforge.threshold_pipelines import (
    thm14_pipeline,
    thm14_size,
    thm15_pipeline,
    verify_certificate,
)
from homforge.types import HomFreeness, SearchStatus

logger = logging.getLogger(__name__)

HINV_TOLERANCE = 1e-12


class SuiteFailure(AssertionError):
    pass


def _require(condition: bool, detail: str) -> None:
    if not condition:
        raise SuiteFailure(detail)


def _random_graph(rng: np.random.Generator, max_n: int, min_n: int = 1) -> Graph:
    n = int(rng.integers(min_n, max_n + 1))
    sample = nx.gnp_random_graph(n, float(rng.random()), seed=int(rng.integers(2**31)))
    return Graph.from_edges(n, sample.edges)


def _girth_ok(value: int | None, minimum: int) -> bool:
    return value is None or value >= minimum


def suite_mycielski(params: SuiteParams) -> str:
    m = t_fold_mycielskian(cycle_graph(7), 2)
    og = odd_girth(m.graph)
    _require(m.graph.n == 22, f"M_2(C7) has {m.graph.n} vertices")
    _require(og == 7, f"M_2(C7) has odd girth {og}")
    return "M_2(C7): 22 vertices, odd girth 7"


def suite_mycielski_extension(params: SuiteParams) -> str:
    rng = np.random.default_rng(params.seed)
    checked = 0
    for _ in range(params.instances):
        gamma = _random_graph(rng, params.n)
        base = odd_girth(gamma)
        for t in (1, 2, 3):
            if _girth_ok(base, 2 * t + 3):
                lifted = odd_girth(t_fold_mycielskian(gamma, t).graph)
                _require(_girth_ok(lifted, 2 * t + 3), f"t={t}: odd girth {base} -> {lifted}")
                checked += 1
    return f"{checked} (graph, t) pairs preserved odd girth"


def suite_mindeg_threshold(params: SuiteParams) -> str:
    g = blowup(cycle_graph(9), [params.n] * 9)
    cert = thm14_pipeline(g, 1)
    k = cert.claims.k
    _require(cert.claims.violations == 0, "map has violations")
    _require(k <= 4, f"k={k} exceeds floor(1/delta)=4")
    _require(cert.target.n == thm14_size(k, 1) <= 255, f"target has {cert.target.n} vertices")
    _require(verify_certificate(g, cert), "certificate re-check failed")
    return f"k={k}, |target|={cert.target.n}"


def suite_domination_threshold(params: SuiteParams) -> str:
    g = cycle_graph(7)
    cert = thm15_pipeline(g, 1)
    _require(cert.claims.violations == 0, "map has violations")
    _require(cert.target.n <= 11, f"target has {cert.target.n} vertices")
    _require(verify_certificate(g, cert), "certificate re-check failed")
    return f"domination {cert.claims.k}, |target|={cert.target.n}"


def suite_pullout(params: SuiteParams) -> str:
    rng = np.random.default_rng(params.seed)
    largest = 0
    for _ in range(params.instances):
        g = _random_graph(rng, params.n)
        eps = float(rng.uniform(0.05, 1.0))
        dec = pullout(g, eps)
        problems = verify_pullout(g, dec)
        _require(not problems, f"n={g.n} eps={eps:.4f}: {problems[:3]}")
        _require(dec.k <= 3 / eps + 1e-9, f"k={dec.k} > 3/eps for eps={eps:.4f}")
        largest = max(largest, dec.k)
    return f"{params.instances} decompositions verified, largest k={largest}"


def suite_pullout_approx(params: SuiteParams) -> str:
    g = blowup(cycle_graph(11), [params.n] * 11)
    result = thm110_pipeline(g, complete_graph(3), 0.2)
    target = result.target
    _require(odd_girth_up_to(target, 3) is None, "target contains a triangle")
    _require(target.n <= 16, f"target has {target.n} vertices")
    _require(result.report.passed, f"{result.report.violations} violations over threshold")
    return f"|target|={target.n}, violations={result.report.violations}"


def suite_regularity_approx(params: SuiteParams) -> str:
    # a C5 blowup contains C5, so the host pattern here is the triangle
    g = blowup(cycle_graph(5), [params.n] * 5)
    tri = complete_graph(3)
    counts = []
    for parts in (2, 5, 10):
        result = prop18_pipeline(g, tri, tri, 0.2, m_override=parts, seed=params.seed)
        report = result.report
        _require(report.pattern_freeness == HomFreeness.FREE.value, f"M={parts}: target not free")
        total = report.within_part + report.low_density + report.deleted_pairs
        _require(total == report.violations, f"M={parts}: decomposition does not sum")
        counts.append(report.violations)
    _require(counts[1] == 0, f"balanced C5 blowup with M=5 has {counts[1]} violations")
    return "violations at M=2,5,10: " + ", ".join(map(str, counts))


def suite_star_figures(params: SuiteParams) -> str:
    tri = complete_graph(3)
    single = build_star(tri, enumerate_f_copies(tri, tri).copies, tri)
    _require(single.graph.n == 6 and single.graph.edge_count == 3, "K3 star is not 3K2")
    _require(all(d == 1 for d in single.graph.degrees), "K3 star is not a perfect matching")
    bowtie = bowtie_graph()
    star = build_star(bowtie, enumerate_f_copies(bowtie, tri).copies, tri)
    _require((star.graph.n, star.graph.edge_count) == (20, 24), "bowtie star has wrong size")
    problems = audit_copy_bipartite(star)
    _require(not problems, f"bipartite audit failed: {problems[:3]}")
    return "K3 star 6/3, bowtie star 20/24"


def suite_triangle_forests(params: SuiteParams) -> str:
    rng = np.random.default_rng(params.seed)
    for _ in range(params.instances):
        copies = int(rng.integers(1, params.n + 1))
        forest = random_k3_forest(copies, int(rng.integers(2**31)))
        og = check_t_star_odd_girth(forest)
        _require(_girth_ok(og, 9), f"{copies} triangles: star odd girth {og}")
    return f"{params.instances} triangle forests, star odd girth >= 9"


def suite_witness(params: SuiteParams) -> str:
    tri = complete_graph(3)
    details = []
    for length, minimum in ((5, 7), (7, 9)):
        bundle = thm113_witness(tri, cycle_graph(length), 1 / params.n, params.seed, n=params.n)
        report = bundle.report
        _require(report.unique_cover, f"C{length}: unique cover failed")
        _require(_girth_ok(report.star_odd_girth, minimum), f"C{length}: odd girth too small")
        _require(report.pattern_freeness == HomFreeness.FREE.value, f"C{length}: not free")
        details.append(f"C{length}: m={report.hyperedges_used} og={report.star_odd_girth}")
    return "; ".join(details)


def suite_entropy(params: SuiteParams) -> str:
    rng = np.random.default_rng(params.seed)
    for _ in range(params.instances):
        forest = random_k3_forest(int(rng.integers(1, 5)), int(rng.integers(2**31)))
        star = build_star(forest.graph, forest.labelled_copies(), forest.f)
        q = int(rng.integers(1, 5))
        phi = VertexMap(star.graph.n, q, tuple(int(y) for y in rng.integers(q, size=star.graph.n)))
        summary = entropy_diagnostics(star.labelling(), phi).summary
        _require(summary.identity_ok and summary.superadditivity_ok, "entropy identity failed")
    grid = np.linspace(0.0, 1.0, params.grid)
    error = float(np.max(np.abs(binary_entropy(h_inverse(grid)) - grid)))
    _require(error <= HINV_TOLERANCE, f"h_inverse residual {error:.3g}")
    return f"{params.instances} maps tabulated, h_inverse residual {error:.3g}"


def suite_hypergraphs(params: SuiteParams) -> str:
    pool = [e for size in (2, 3) for e in itertools.combinations(range(5), size)]
    checked = 0
    for count in range(5):
        for edges in itertools.combinations(pool, count):
            h = Hypergraph.from_edges(5, edges)
            forest = is_hyperforest(h).is_forest
            acyclic = shortest_berge_cycle(h, 2 * len(pool)) is None
            _require(forest == acyclic, f"hyperforest verdict disagrees on {list(edges)}")
            checked += 1
    counts = []
    for seed in range(params.seed, params.seed + params.instances):
        h = random_high_girth_hypergraph(params.n, 3, 3, seed, c=WITNESS_EDGE_CONSTANT)
        _require(shortest_berge_cycle(h, 3) is None, f"seed {seed}: short Berge cycle")
        counts.append(h.edge_count)
    scale = params.n ** (1 + 1 / 3)
    median = statistics.median(counts)
    if median < 0.1 * scale:
        logger.warning(
            "Median edge count below the scaling floor",
            extra={"stage": "selfcheck", "detail": f"median={median} scale={scale:.6g}"},
        )
    return f"{checked} small hypergraphs, median edges {median} vs n^(4/3)={scale:.4g}"


def suite_oracles(params: SuiteParams) -> str:
    rng = np.random.default_rng(params.seed)
    mvm = 0
    while mvm < params.instances:
        g, gamma = _random_graph(rng, 7), _random_graph(rng, 4)
        if gamma.n**g.n > 100_000:
            continue
        brute = min_violation_map(g, gamma, method="brute-force")
        bnb = min_violation_map(g, gamma, cap=0)
        _require(brute.violations == bnb.violations, "brute force and branch-and-bound differ")
        mvm += 1
    hom = 0
    while hom < params.extra_instances:
        src, dst = _random_graph(rng, 7), _random_graph(rng, 5)
        if dst.n**src.n > 1_000_000:
            continue
        result = find_homomorphism(src, dst)
        if result.status is SearchStatus.UNKNOWN:
            continue
        exists = min_violation_map(src, dst, cap=1_000_000, method="brute-force").violations == 0
        _require(result.found == exists, f"hom verdict disagrees ({src.n}->{dst.n})")
        hom += 1
    return f"{mvm} min-violation and {hom} homomorphism instances agree"


SUITES: dict[str, Callable[[SuiteParams], str]] = {
    "mycielski": suite_mycielski,
    "mycielski-extension": suite_mycielski_extension,
    "mindeg-threshold": suite_mindeg_threshold,
    "domination-threshold": suite_domination_threshold,
    "pullout": suite_pullout,
    "pullout-approx": suite_pullout_approx,
    "regularity-approx": suite_regularity_approx,
    "star-figures": suite_star_figures,
    "triangle-forests": suite_triangle_forests,
    "witness": suite_witness,
    "entropy": suite_entropy,
    "hypergraphs": suite_hypergraphs,
    "oracles": suite_oracles,
}


@dataclass(frozen=True)
class SuiteOutcome:
    name: str
    passed: bool
    detail: str


def run_suite(name: str, params: SuiteParams) -> SuiteOutcome:
    start = time.monotonic()
    try:
        detail = record_stage(f"selfcheck:{name}", lambda: SUITES[name](params))
        outcome = SuiteOutcome(name, True, detail)
    except (SuiteFailure, HomforgeError) as exc:
        outcome = SuiteOutcome(name, False, str(exc))
    logger.info(
        "Suite finished",
        extra={
            "stage": "selfcheck",
            "detail": f"{name}={'PASS' if outcome.passed else 'FAIL'}",
            "duration_s": round(time.monotonic() - start, 3),
        },
    )
    return outcome


def run_selfcheck(profile: SelfcheckProfile, only: str | None = None) -> list[SuiteOutcome]:
    return [run_suite(name, profile.suite(name)) for name in profile.enabled_suites(only)]


def render_table(outcomes: list[SuiteOutcome]) -> str:
    width = max((len(o.name) for o in outcomes), default=5)
    lines = [f"{'suite'.ljust(width)}  status  detail"]
    for outcome in outcomes:
        status = "PASS" if outcome.passed else "FAIL"
        lines.append(f"{outcome.name.ljust(width)}  {status:<6}  {outcome.detail}")
    return "\n".join(lines) + "\n"
