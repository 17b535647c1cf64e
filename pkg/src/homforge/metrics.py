from __future__ import annotations

import time
from typing import Callable, TypeVar

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

T = TypeVar("T")

REGISTRY = CollectorRegistry()

RUNS_TOTAL = Counter(
    "homforge_runs_total",
    "CLI invocations by command and outcome",
    ["command", "outcome"],
    registry=REGISTRY,
)
STAGE_DURATION = Histogram(
    "homforge_stage_duration_seconds",
    "Duration by pipeline stage",
    ["stage"],
    buckets=(0.001, 0.01, 0.05, 0.1, 0.5, 1, 2, 5, 10, 30, 120),
    registry=REGISTRY,
)
SEARCH_NODES = Counter(
    "homforge_search_nodes_total",
    "Search-tree node expansions by search kind",
    ["search"],
    registry=REGISTRY,
)


def record_stage(name: str, fn: Callable[[], T]) -> T:
    start = time.monotonic()
    try:
        return fn()
    finally:
        STAGE_DURATION.labels(stage=name).observe(time.monotonic() - start)


def write_metrics(path: str) -> None:
    write_to_textfile(path, REGISTRY)
