"""Homomorphism densities, reduced graphs and the weak-regularity partitioner."""

from __future__ import annotations

import logging
import math
import string
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from homforge.failure_taxonomy import PreconditionError, ResourceCapError
from homforge.graph_core import TOLERANCE, Graph, VertexMap, WeightedGraph
from homforge.types import DensityMode

logger = logging.getLogger(__name__)

DEFAULT_DENSITY_LIMIT = 100_000_000
EXHAUSTIVE_CUT_LIMIT = 20
LOCAL_SEARCH_RESTARTS = 16
_CUT_CHUNK = 1 << 14


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    exact: bool
    std_error: float = 0.0
    samples: int = 0


def _exact_density(h: Graph, weights: np.ndarray) -> float:
    n = weights.shape[0]
    letters = string.ascii_letters
    if h.n > len(letters):
        raise ResourceCapError(f"CAP_PATTERN_SIZE: patterns above {len(letters)} vertices")
    binary = bool(np.all((weights == 0) | (weights == 1)))
    # 0/1 weights count homomorphisms exactly in integers
    matrix = weights.astype(np.int64) if binary else weights
    ones = np.ones(n, dtype=matrix.dtype)
    operands: list[np.ndarray] = []
    subscripts: list[str] = []
    for u, v in h.sorted_edges:
        operands.append(matrix)
        subscripts.append(letters[u] + letters[v])
    for v in h.isolated_vertices():
        operands.append(ones)
        subscripts.append(letters[v])
    total = np.einsum(",".join(subscripts) + "->", *operands, optimize="greedy")
    return float(total) / float(n) ** h.n


def hom_density(
    h: Graph,
    w: WeightedGraph,
    mode: DensityMode = DensityMode.EXACT,
    *,
    samples: int = 100_000,
    seed: int | None = None,
    exact_limit: int = DEFAULT_DENSITY_LIMIT,
    allow_mc: bool = False,
) -> DensityEstimate:
    if h.n == 0:
        return DensityEstimate(1.0, True)
    if w.n == 0:
        return DensityEstimate(0.0, True)
    if mode is DensityMode.EXACT and w.n**h.n > exact_limit:
        if not allow_mc:
            raise ResourceCapError(
                f"CAP_DENSITY_ENUMERATION: {w.n}^{h.n} maps exceed exact limit {exact_limit}"
            )
        mode = DensityMode.MC
    if mode is DensityMode.EXACT:
        return DensityEstimate(_exact_density(h, w.weights), True)

    if seed is None:
        raise PreconditionError("SEED_REQUIRED: Monte Carlo densities need an explicit seed")
    rng = np.random.default_rng(seed)
    maps = rng.integers(0, w.n, size=(samples, h.n))
    products = np.ones(samples)
    for u, v in h.sorted_edges:
        products *= w.weights[maps[:, u], maps[:, v]]
    error = float(products.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return DensityEstimate(float(products.mean()), False, error, samples)


@dataclass(frozen=True)
class EquiPartition:
    parts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        members = [v for part in self.parts for v in part]
        if sorted(members) != list(range(len(members))):
            raise PreconditionError("INVALID_PARTITION: parts must cover 0..n-1 disjointly")
        sizes = [len(part) for part in self.parts]
        if sizes and (min(sizes) == 0 or max(sizes) - min(sizes) > 1):
            raise PreconditionError(f"INVALID_PARTITION: part sizes {sizes} are not equitable")

    @property
    def M(self) -> int:
        return len(self.parts)

    @property
    def n(self) -> int:
        return sum(len(part) for part in self.parts)

    @cached_property
    def part_of(self) -> tuple[int, ...]:
        owner = [0] * self.n
        for index, part in enumerate(self.parts):
            for v in part:
                owner[v] = index
        return tuple(owner)

    def projection(self) -> VertexMap:
        return VertexMap(self.n, self.M, self.part_of)

    def indicator(self) -> np.ndarray:
        matrix = np.zeros((self.n, self.M), dtype=np.int64)
        matrix[np.arange(self.n), list(self.part_of)] = 1
        return matrix

    @classmethod
    def from_order(cls, order: Sequence[int], M: int) -> EquiPartition:
        """Chunk ``order`` into M consecutive blocks whose sizes differ by at most one."""
        base, extra = divmod(len(order), M)
        parts: list[tuple[int, ...]] = []
        start = 0
        for index in range(M):
            size = base + (1 if index < extra else 0)
            parts.append(tuple(sorted(order[start:start + size])))
            start += size
        return cls(tuple(parts))


def _pair_counts(g: Graph, indicator: np.ndarray) -> np.ndarray:
    adjacency = g.adjacency_matrix()
    return indicator.T @ adjacency @ indicator


def reduced_graph(g: Graph, p: EquiPartition) -> WeightedGraph:
    if p.n != g.n:
        raise PreconditionError(f"DIMENSION_MISMATCH: partition of {p.n} vertices, graph has {g.n}")
    counts = _pair_counts(g, p.indicator())
    sizes = np.array([len(part) for part in p.parts], dtype=float)
    return WeightedGraph(counts / np.outer(sizes, sizes))


def step_function(g: Graph, p: EquiPartition) -> WeightedGraph:
    """The reduced weights spread back over V(g) (the graphon G_P on n points)."""
    reduced = reduced_graph(g, p).weights
    owner = np.array(p.part_of, dtype=np.int64)
    return WeightedGraph(reduced[np.ix_(owner, owner)])


@dataclass(frozen=True)
class CountingCheck:
    pattern_vertices: int
    pattern_edges: int
    density_graph: float
    density_partition: float
    bound: float
    holds: bool


@dataclass(frozen=True)
class RegularityResult:
    """`discrepancy` and `converged` describe `partition`; `refined_classes` counts the cut
    classes before they are chunked into M equal parts."""

    partition: EquiPartition
    converged: bool
    rounds: int
    refined_classes: int
    discrepancy: float
    checks: tuple[CountingCheck, ...]


def _class_energy(adjacency: np.ndarray, classes: list[list[int]]) -> float:
    n = adjacency.shape[0]
    indicator = np.zeros((n, len(classes)))
    for index, members in enumerate(classes):
        indicator[members, index] = 1.0
    counts = indicator.T @ adjacency @ indicator
    sizes = indicator.sum(axis=0)
    return float((counts**2 / np.outer(sizes, sizes)).sum()) / n**2


def _residual(adjacency: np.ndarray, classes: list[list[int]]) -> np.ndarray:
    approx = np.zeros_like(adjacency)
    for a in classes:
        for b in classes:
            block = adjacency[np.ix_(a, b)]
            approx[np.ix_(a, b)] = block.mean()
    return adjacency - approx


def _polish_cut(residual: np.ndarray, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Alternate best responses; keeps only strictly contributing vertices."""
    cols = (rows @ residual) > TOLERANCE
    for _ in range(64):
        new_rows = (residual @ cols) > TOLERANCE
        new_cols = (new_rows @ residual) > TOLERANCE
        if np.array_equal(new_rows, rows) and np.array_equal(new_cols, cols):
            break
        rows, cols = new_rows, new_cols
    value = float(rows.astype(float) @ residual @ cols.astype(float))
    return rows, cols, value


def _exhaustive_cut(residual: np.ndarray) -> np.ndarray:
    n = residual.shape[0]
    shifts = np.arange(n)
    best_value, best_rows = -1.0, np.zeros(n, dtype=bool)
    for start in range(0, 1 << n, _CUT_CHUNK):
        masks = np.arange(start, min(start + _CUT_CHUNK, 1 << n), dtype=np.int64)
        rows = ((masks[:, None] >> shifts) & 1).astype(float)
        values = np.clip(rows @ residual, 0.0, None).sum(axis=1)
        index = int(np.argmax(values))
        if values[index] > best_value + TOLERANCE:
            best_value, best_rows = float(values[index]), rows[index].astype(bool)
    return best_rows


def _best_cut(
    residual: np.ndarray, rng: np.random.Generator | None
) -> tuple[np.ndarray, np.ndarray, float]:
    n = residual.shape[0]
    best: tuple[np.ndarray, np.ndarray, float] | None = None
    for signed in (residual, -residual):
        if n <= EXHAUSTIVE_CUT_LIMIT:
            starts = [_exhaustive_cut(signed)]
        else:
            assert rng is not None
            starts = [rng.random(n) < 0.5 for _ in range(LOCAL_SEARCH_RESTARTS)]
        for rows in starts:
            candidate = _polish_cut(signed, rows)
            if best is None or candidate[2] > best[2] + TOLERANCE:
                best = candidate
    assert best is not None
    return best


def _split_classes(
    adjacency: np.ndarray, classes: list[list[int]], cut_sets: list[set[int]], M: int
) -> list[list[int]]:
    """Apply single-class splits by the cut sets in order of energy gain, up to M classes."""
    while len(classes) < M:
        base = _class_energy(adjacency, classes)
        best_gain, best_classes = TOLERANCE, None
        for index, members in enumerate(classes):
            for cut in cut_sets:
                inside = [v for v in members if v in cut]
                outside = [v for v in members if v not in cut]
                if not inside or not outside:
                    continue
                trial = classes[:index] + [inside, outside] + classes[index + 1:]
                gain = _class_energy(adjacency, trial) - base
                if gain > best_gain:
                    best_gain, best_classes = gain, trial
        if best_classes is None:
            break
        classes = best_classes
    return classes


def fk_partition(
    g: Graph,
    M: int,
    test_family: Sequence[Graph] = (),
    seed: int | None = None,
    density_limit: int = DEFAULT_DENSITY_LIMIT,
) -> RegularityResult:
    if not 1 <= M <= max(g.n, 1) or g.n == 0:
        raise PreconditionError(f"PRECONDITION_PARTS: need 1 <= M <= n, got M={M}, n={g.n}")
    rng = None
    if g.n > EXHAUSTIVE_CUT_LIMIT:
        if seed is None:
            raise PreconditionError(
                f"SEED_REQUIRED: n={g.n} above {EXHAUSTIVE_CUT_LIMIT} uses seeded cut search"
            )
        rng = np.random.default_rng(seed)

    adjacency = g.adjacency_matrix(dtype=float)
    n2 = float(g.n) ** 2
    gamma = 1.0 / math.sqrt(math.log2(M)) if M > 1 else math.inf
    max_rounds = max(1, math.ceil(math.log2(M))) if M > 1 else 0
    classes: list[list[int]] = [list(range(g.n))]
    rounds = 0
    while True:
        rows, cols, value = _best_cut(_residual(adjacency, classes), rng)
        if value <= TOLERANCE or len(classes) >= M or rounds >= max_rounds:
            break
        rounds += 1
        cut_sets = [set(np.flatnonzero(rows).tolist()), set(np.flatnonzero(cols).tolist())]
        refined = _split_classes(adjacency, classes, cut_sets, M)
        if refined == classes:
            break
        classes = refined

    order = [v for members in classes for v in members]
    partition = EquiPartition.from_order(order, M)
    # chunking into M equal parts moves vertices, so measure the returned parts
    _, _, value = _best_cut(_residual(adjacency, [list(part) for part in partition.parts]), rng)
    discrepancy = value / n2
    converged = discrepancy <= gamma + TOLERANCE or discrepancy <= TOLERANCE
    if not converged:
        logger.warning(
            "Cut refinement stopped before the discrepancy target",
            extra={"stage": "fk_partition", "detail": f"disc={discrepancy:.4g} gamma={gamma:.4g}"},
        )

    checks: list[CountingCheck] = []
    for pattern in test_family:
        if g.n**pattern.n > density_limit:
            continue
        dense = hom_density(pattern, WeightedGraph.from_graph(g), exact_limit=density_limit)
        stepped = hom_density(pattern, step_function(g, partition), exact_limit=density_limit)
        bound = 4 * pattern.edge_count * gamma if M > 1 else math.inf
        checks.append(
            CountingCheck(
                pattern.n,
                pattern.edge_count,
                dense.value,
                stepped.value,
                bound,
                abs(dense.value - stepped.value) <= bound + TOLERANCE,
            )
        )
    return RegularityResult(partition, converged, rounds, len(classes), discrepancy, tuple(checks))
