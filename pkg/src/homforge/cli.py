from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence

from pydantic import ValidationError

from homforge.approx_hom import (
    ApproxHomResult,
    prop18_pipeline,
    pullout_domination_route,
    thm110_pipeline,
    verify_approx_hom,
)
from homforge.artifacts import (
    append_jsonl,
    ensure_bundle_dir,
    ensure_contract,
    render_report,
    write_text,
)
from homforge.config import get_settings
from homforge.failure_taxonomy import (
    HomforgeError,
    InternalConsistencyError,
    PreconditionError,
    ResourceCapError,
    classify_failure_reason,
    exit_code_for,
)
from homforge.graph_core import (
    Graph,
    VertexMap,
    find_homomorphism,
    is_hom_free,
    odd_girth,
    shortest_odd_cycle,
)
from homforge.graph_io import (
    format_vertex_map,
    read_graph,
    read_star_labels,
    read_vertex_map,
    write_graph,
    write_hypergraph,
    write_mycielski_labels,
    write_star_labels,
    write_vertex_map,
)
from homforge.hypergraphs import random_high_girth_hypergraph
from homforge.logging_utils import configure_logging
from homforge.lower_bound_lab import entropy_diagnostics, prop51_witness, thm113_witness
from homforge.metrics import RUNS_TOTAL, record_stage, write_metrics
from homforge.mycielski import mycielskian_size, t_fold_mycielskian
from homforge.profile import load_profile
from homforge.selfcheck import render_table, run_selfcheck
from homforge.star_construction import build_star, enumerate_f_copies
from homforge.threshold_pipelines import cor16_pipeline, thm14_pipeline, thm15_pipeline
from homforge.types import (
    DEFAULT_BUNDLE_CONTRACT,
    ApproxRoute,
    DensityMode,
    DominationMode,
    HomFreeness,
    RunConfig,
    SearchStatus,
    SubgraphMode,
    WitnessMode,
)

logger = logging.getLogger(__name__)

RANDOMIZED_COMMANDS = {"hypergraph-gen", "witness"}


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _verify_failed(detail: str) -> HomforgeError:
    return InternalConsistencyError(f"VERIFY_FAILED: {detail}")


def _run_log(path: Path, records: list[dict]) -> None:
    path.unlink(missing_ok=True)
    for record in records:
        append_jsonl(path, record)


def _write_construction(
    config: RunConfig, target: Graph, mapping: VertexMap, report: str, records: list[dict]
) -> None:
    """Target, map and report go where the flags say; the run log sits next to the report."""
    report_path = config.outputs["report"]
    write_graph(config.outputs["out_target"], target)
    write_vertex_map(config.outputs["out_map"], mapping)
    write_text(report_path, report)
    _run_log(report_path.with_suffix(".jsonl"), records)


def build_config(args: argparse.Namespace) -> RunConfig:
    settings = get_settings()
    caps = settings.caps()
    updates = {}
    if getattr(args, "cap", None) is not None:
        updates["size_cap"] = args.cap
    if getattr(args, "budget", None) is not None:
        updates["hom_budget"] = args.budget
    inputs = {
        key: Path(getattr(args, key))
        for key in ("inp", "src", "dst", "host", "pattern", "f", "h", "g", "target", "map",
                    "labels_in")
        if getattr(args, key, None)
    }
    outputs = {
        key: Path(getattr(args, key))
        for key in ("out", "labels", "out_dir", "out_target", "out_map", "report")
        if getattr(args, key, None)
    }
    try:
        return RunConfig(
            subcommand=args.command,
            inputs=inputs,
            outputs=outputs,
            t=getattr(args, "t", None),
            eps=getattr(args, "eps", None),
            delta=getattr(args, "delta", None),
            m_override=getattr(args, "m", None),
            n=getattr(args, "n", None),
            uniformity=getattr(args, "uniformity", None),
            girth=getattr(args, "girth", None),
            seed=getattr(args, "seed", None),
            randomized=args.command in RANDOMIZED_COMMANDS,
            caps=caps.model_copy(update=updates),
            verbose=args.verbose,
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        message = str(first.get("msg", "invalid value")).removeprefix("Value error, ")
        if ":" in message and message.split(":", 1)[0].isupper():
            raise PreconditionError(message) from None
        field = ".".join(str(part) for part in first.get("loc", ())) or "config"
        raise PreconditionError(f"INVALID_ARGUMENT: {field}: {message}") from None


def cmd_odd_girth(args: argparse.Namespace, config: RunConfig) -> int:
    g = read_graph(config.inputs["inp"])
    value = odd_girth(g)
    _emit("none" if value is None else str(value))
    if args.cycle and value is not None:
        _emit(" ".join(map(str, shortest_odd_cycle(g))))
    return 0


def cmd_hom(args: argparse.Namespace, config: RunConfig) -> int:
    src, dst = read_graph(config.inputs["src"]), read_graph(config.inputs["dst"])
    result = record_stage("hom", lambda: find_homomorphism(src, dst, config.caps.hom_budget))
    if result.status is SearchStatus.UNKNOWN:
        raise ResourceCapError(f"BUDGET_HOM_SEARCH: undecided after {result.nodes} nodes")
    _emit(result.status.value)
    if result.mapping is not None:
        if "out" in config.outputs:
            write_vertex_map(config.outputs["out"], result.mapping)
        else:
            _emit(format_vertex_map(result.mapping))
    return 0


def cmd_hom_free(args: argparse.Namespace, config: RunConfig) -> int:
    host, pattern = read_graph(config.inputs["host"]), read_graph(config.inputs["pattern"])
    verdict = is_hom_free(host, pattern, config.caps.hom_budget)
    _emit(verdict.value)
    if verdict is HomFreeness.UNKNOWN:
        raise ResourceCapError("BUDGET_HOM_SEARCH: hom-freeness undecided within budget")
    return 0


def cmd_mycielski(args: argparse.Namespace, config: RunConfig) -> int:
    gamma = read_graph(config.inputs["inp"])
    t = config.t or 1
    size, _ = mycielskian_size(gamma.n, gamma.edge_count, t)
    if size > config.caps.size_cap:
        raise ResourceCapError(
            f"CAP_TARGET_SIZE: M_t has {size} vertices, cap {config.caps.size_cap}"
        )
    result = t_fold_mycielskian(gamma, t)
    out = config.outputs["out"]
    write_graph(out, result.graph)
    write_mycielski_labels(config.outputs.get("labels", out.with_suffix(".lab")), result.labels())
    _emit(f"vertices {result.graph.n} edges {result.graph.edge_count}")
    return 0


def cmd_threshold_hom(args: argparse.Namespace, config: RunConfig) -> int:
    g = read_graph(config.inputs["inp"])
    t = config.t or 1
    mode = DominationMode(args.mode)
    size_cap = config.caps.size_cap
    if mode is DominationMode.MINDEG:
        cert = record_stage("thm14", lambda: thm14_pipeline(g, t, size_cap))
    elif mode is DominationMode.DOMINATION:
        cert = record_stage(
            "thm15",
            lambda: thm15_pipeline(
                g, t, exact_limit=config.caps.domination_limit, size_cap=size_cap
            ),
        )
    else:
        if config.delta is None:
            raise PreconditionError("PRECONDITION_DELTA: --mode vc needs --delta")
        delta = config.delta
        cert = record_stage(
            "cor16", lambda: cor16_pipeline(g, t, delta, config.caps.vc_cap, size_cap)
        )
    _write_construction(
        config,
        cert.target,
        cert.map,
        render_report(cert.claims),
        [{"command": config.subcommand, "mode": mode.value, "t": t,
          "verified": cert.claims.verified}],
    )
    _emit(f"target {cert.target.n} k {cert.claims.k} violations {cert.claims.violations}")
    return 0


def _approx_result(args: argparse.Namespace, config: RunConfig) -> ApproxHomResult:
    g = read_graph(config.inputs["inp"])
    route = ApproxRoute(args.route)
    if config.eps is None:
        raise PreconditionError("PRECONDITION_EPS: approx-hom needs --eps")
    eps = config.eps
    budget = config.caps.hom_budget
    if route is ApproxRoute.PULLOUT_DOMINATION:
        return pullout_domination_route(g, eps, config.t or 1, config.caps.size_cap, budget)
    if "f" not in config.inputs:
        raise PreconditionError(f"PRECONDITION_PATTERN: route {route.value} needs --f")
    f = read_graph(config.inputs["f"])
    if route is ApproxRoute.PULLOUT:
        return thm110_pipeline(g, f, eps, budget)
    if "h" not in config.inputs:
        raise PreconditionError("PRECONDITION_PATTERN: route fk needs --h")
    h = read_graph(config.inputs["h"])
    return prop18_pipeline(
        g,
        f,
        h,
        eps,
        config.m_override,
        delta_value=config.delta,
        seed=config.seed,
        subgraph_mode=SubgraphMode(args.subgraph_mode) if args.subgraph_mode else None,
        budget=budget,
    )


def cmd_approx_hom(args: argparse.Namespace, config: RunConfig) -> int:
    result = record_stage(f"approx-{args.route}", lambda: _approx_result(args, config))
    passed = bool(getattr(result.report, "passed", True))
    _write_construction(
        config,
        result.target,
        result.map,
        render_report(result.report),
        [{"command": config.subcommand, "route": args.route, "passed": passed}],
    )
    _emit(f"target {result.target.n} violations {getattr(result.report, 'violations', 0)}")
    if not passed:
        raise _verify_failed("violations exceed eps*n^2")
    return 0


def cmd_star(args: argparse.Namespace, config: RunConfig) -> int:
    f, g = read_graph(config.inputs["f"]), read_graph(config.inputs["inp"])
    enumeration = enumerate_f_copies(g, f)
    star = record_stage(
        "star", lambda: build_star(g, enumeration.copies, f, config.caps.size_cap)
    )
    out = config.outputs["out"]
    write_graph(out, star.graph)
    write_star_labels(config.outputs.get("labels", out.with_suffix(".lab")), star.labelling())
    _emit(f"vertices {star.graph.n} edges {star.graph.edge_count} copies {star.m}")
    return 0


def cmd_hypergraph_gen(args: argparse.Namespace, config: RunConfig) -> int:
    assert config.seed is not None
    h = record_stage(
        "hypergraph",
        lambda: random_high_girth_hypergraph(
            config.n or 0, config.uniformity or 0, config.girth or 0, config.seed, c=args.c
        ),
    )
    write_hypergraph(config.outputs["out"], h)
    _emit(f"hyperedges {h.edge_count}")
    return 0


def cmd_witness(args: argparse.Namespace, config: RunConfig) -> int:
    assert config.seed is not None
    if config.eps is None:
        raise PreconditionError("PRECONDITION_EPS: witness needs --eps")
    f, h = read_graph(config.inputs["f"]), read_graph(config.inputs["h"])
    out_dir = ensure_bundle_dir(config.outputs["out_dir"])
    mode = WitnessMode(args.mode)
    if mode is WitnessMode.THM113:
        candidates = [read_graph(path) for path in args.candidate or ()]
        bundle = record_stage(
            "witness",
            lambda: thm113_witness(
                f, h, config.eps, config.seed, config.caps,
                n=config.n, c=args.c, candidates=candidates,
            ),
        )
        assert bundle.hypergraph is not None and bundle.star is not None
        write_hypergraph(out_dir / "h.hg", bundle.hypergraph)
        write_graph(out_dir / "gstar.el", bundle.star.graph)
        write_star_labels(out_dir / "gstar.lab", bundle.star.labelling())
    else:
        bundle = record_stage(
            "witness", lambda: prop51_witness(f, h, config.eps, config.seed,
                                              budget=config.caps.hom_budget)
        )
    write_graph(out_dir / "g.el", bundle.graph)
    write_text(out_dir / "report.txt", render_report(bundle.report))
    _run_log(
        out_dir / "run.jsonl",
        [{"command": config.subcommand, "mode": mode.value, "seed": config.seed}],
    )
    ensure_contract(out_dir, DEFAULT_BUNDLE_CONTRACT)
    report = bundle.report
    _emit(f"vertices {report.star_vertices} edges {report.star_edges} "
          f"freeness {report.pattern_freeness}")
    return 0


def cmd_entropy(args: argparse.Namespace, config: RunConfig) -> int:
    labelling = read_star_labels(config.inputs["labels_in"])
    phi = read_vertex_map(config.inputs["map"], source_n=labelling.size)
    report = record_stage(
        "entropy",
        lambda: entropy_diagnostics(
            labelling,
            phi,
            DensityMode(args.mode),
            seed=config.seed,
            samples=args.samples,
            allow_mc=args.allow_mc,
        ),
    )
    rows = {
        str(row.base): [row.entropy, row.information, *row.coordinate_information]
        for row in report.vertices
    }
    text = render_report({"summary": report.summary.model_dump(), "vertex": rows})
    if "report" in config.outputs:
        write_text(config.outputs["report"], text)
    else:
        _emit(text)
    return 0


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> int:
    g, gamma = read_graph(config.inputs["g"]), read_graph(config.inputs["target"])
    mapping = read_vertex_map(config.inputs["map"], source_n=g.n, target_n=gamma.n)
    f = read_graph(config.inputs["f"])
    report = verify_approx_hom(g, gamma, mapping, config.eps or 0.0, f, config.caps.hom_budget)
    _emit(render_report(report))
    if not report.passed:
        raise _verify_failed(f"{report.violations} violations > {report.threshold!r}")
    if report.pattern_freeness != HomFreeness.FREE.value:
        raise _verify_failed(f"target is {report.pattern_freeness} for F")
    return 0


def cmd_selfcheck(args: argparse.Namespace, config: RunConfig) -> int:
    profile = load_profile(args.profile or get_settings().profile_path)
    outcomes = run_selfcheck(profile, args.filter)
    _emit(render_table(outcomes))
    failed = [o.name for o in outcomes if not o.passed]
    if failed:
        raise _verify_failed(f"suites failed: {', '.join(failed)}")
    return 0


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "odd-girth": cmd_odd_girth,
    "hom": cmd_hom,
    "hom-free": cmd_hom_free,
    "mycielski": cmd_mycielski,
    "threshold-hom": cmd_threshold_hom,
    "approx-hom": cmd_approx_hom,
    "star": cmd_star,
    "hypergraph-gen": cmd_hypergraph_gen,
    "witness": cmd_witness,
    "entropy": cmd_entropy,
    "verify": cmd_verify,
    "selfcheck": cmd_selfcheck,
}


def _add_construction_outputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-target", required=True, help="target graph (.el)")
    p.add_argument("--out-map", required=True, help="vertex map (.map)")
    p.add_argument("--report", required=True, help="key-value report; run log beside it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homforge", description="Graph homomorphism constructions and verifiers."
    )
    parser.add_argument("--verbose", action="store_true", help="log INFO records to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("odd-girth", help="length of a shortest odd cycle")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--cycle", action="store_true", help="also print one shortest odd cycle")

    p = sub.add_parser("hom", help="search for a homomorphism src -> dst")
    p.add_argument("--src", required=True)
    p.add_argument("--dst", required=True)
    p.add_argument("--out")
    p.add_argument("--budget", type=int)

    p = sub.add_parser("hom-free", help="tri-state hom-freeness of host for pattern")
    p.add_argument("--host", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--budget", type=int)

    p = sub.add_parser("mycielski", help="t-fold Mycielskian with vertex labels")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels")
    p.add_argument("--cap", type=int)

    p = sub.add_parser("threshold-hom", help="exact homomorphism into a small odd-girth target")
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--mode", choices=[m.value for m in DominationMode], required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--delta", type=float)
    _add_construction_outputs(p)
    p.add_argument("--cap", type=int)

    p = sub.add_parser("approx-hom", help="approximate homomorphism into a pattern-free target")
    p.add_argument("--route", choices=[r.value for r in ApproxRoute], required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--f")
    p.add_argument("--h")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--M", dest="m", type=int, help="number of regularity parts")
    p.add_argument("--t", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--subgraph-mode", choices=[m.value for m in SubgraphMode])
    _add_construction_outputs(p)
    p.add_argument("--cap", type=int)
    p.add_argument("--budget", type=int)

    p = sub.add_parser("star", help="label-tuple blowup of an F-decorated graph")
    p.add_argument("--f", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels")
    p.add_argument("--cap", type=int)

    p = sub.add_parser("hypergraph-gen", help="random partite hypergraph of high Berge girth")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--f", dest="uniformity", type=int, required=True)
    p.add_argument("--g", dest="girth", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("witness", help="lower-bound witness bundle")
    p.add_argument("--mode", choices=[m.value for m in WitnessMode], required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--c", type=float)
    p.add_argument(
        "--candidate", action="append", help="small target to compare against (repeatable)"
    )
    p.add_argument("--out-dir", required=True)
    p.add_argument("--cap", type=int)
    p.add_argument("--budget", type=int)

    p = sub.add_parser("entropy", help="entropy diagnostics of a map out of a star graph")
    p.add_argument("--labels", dest="labels_in", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--mode", choices=[m.value for m in DensityMode], default="exact")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--allow-mc", action="store_true")
    p.add_argument("--report")

    p = sub.add_parser("verify", help="check an approximate homomorphism")
    p.add_argument("--g", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--budget", type=int)

    p = sub.add_parser("selfcheck", help="run the desk-scale acceptance suites")
    p.add_argument("--filter")
    p.add_argument("--profile")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    try:
        config = build_config(args)
        code = COMMANDS[command](args, config)
        RUNS_TOTAL.labels(command=command, outcome="success").inc()
    except HomforgeError as exc:
        category = classify_failure_reason(str(exc))
        code = exit_code_for(category)
        RUNS_TOTAL.labels(command=command, outcome=category).inc()
        logger.info("Command failed", extra={"command": command, "code": exc.code})
        _emit(f"FAIL {exc.code}: {str(exc).split(':', 1)[-1].strip()}")
    settings = get_settings()
    if settings.metrics_enabled():
        write_metrics(settings.metrics_path)
    return code


def main() -> None:
    settings = get_settings()
    configure_logging("INFO" if "--verbose" in sys.argv[1:] else settings.log_level)
    sys.exit(run())
