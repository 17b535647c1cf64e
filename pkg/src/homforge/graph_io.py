"""Text formats: ``.el`` graphs, weighted ``.el``, ``.map``, ``.hg`` and label sidecars."""

from __future__ import annotations

from pathlib import Path
from typing import Iterator

import numpy as np

from homforge.artifacts import write_text
from homforge.failure_taxonomy import InputFormatError, PreconditionError
from homforge.graph_core import Graph, VertexMap, WeightedGraph
from homforge.hypergraphs import Hypergraph
from homforge.mycielski import ROOT, MycielskiVertex
from homforge.star_construction import StarLabelling


def _content_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def _fail(source: str, line: int, reason: str) -> InputFormatError:
    return InputFormatError(f"INVALID_INPUT: {source}:{line}: {reason}")


def _int(token: str, source: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise _fail(source, line, f"expected an integer, got {token!r}") from None


def _read_header(
    lines: Iterator[tuple[int, list[str]]], source: str, keys: tuple[str, ...]
) -> tuple[int, list[int]]:
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise _fail(source, 1, f"missing header '{' '.join(k + ' <int>' for k in keys)}'") from None
    if len(tokens) != 2 * len(keys) or tokens[::2] != list(keys):
        raise _fail(source, number, f"malformed header {' '.join(tokens)!r}")
    values = [_int(token, source, number) for token in tokens[1::2]]
    if any(value < 0 for value in values):
        raise _fail(source, number, "header values must be nonnegative")
    return number, values


def parse_edge_list(text: str, source: str = "<string>") -> Graph:
    lines = _content_lines(text)
    _, (n,) = _read_header(lines, source, ("n",))
    seen: set[tuple[int, int]] = set()
    for number, tokens in lines:
        if len(tokens) != 2:
            raise _fail(source, number, f"expected 'u v', got {' '.join(tokens)!r}")
        u, v = (_int(token, source, number) for token in tokens)
        if not 0 <= u < v < n:
            raise _fail(source, number, f"edge ({u},{v}) needs 0 <= u < v < {n}")
        if (u, v) in seen:
            raise _fail(source, number, f"duplicate edge ({u},{v})")
        seen.add((u, v))
    return Graph(n, frozenset(seen))


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.sorted_edges)
    return "\n".join(lines) + "\n"


def parse_weighted_edge_list(text: str, source: str = "<string>") -> WeightedGraph:
    lines = _content_lines(text)
    _, (n,) = _read_header(lines, source, ("n",))
    weights = np.zeros((n, n), dtype=float)
    seen: set[tuple[int, int]] = set()
    for number, tokens in lines:
        if len(tokens) != 3:
            raise _fail(source, number, f"expected 'u v w', got {' '.join(tokens)!r}")
        u, v = (_int(token, source, number) for token in tokens[:2])
        try:
            w = float(tokens[2])
        except ValueError:
            raise _fail(source, number, f"weight {tokens[2]!r} is not a decimal") from None
        if not (0 <= u < n and 0 <= v < n) or u > v:
            raise _fail(source, number, f"pair ({u},{v}) needs 0 <= u <= v < {n}")
        if not 0.0 <= w <= 1.0:
            raise _fail(source, number, f"weight {w} outside [0,1]")
        if (u, v) in seen:
            raise _fail(source, number, f"duplicate pair ({u},{v})")
        seen.add((u, v))
        weights[u, v] = weights[v, u] = w
    return WeightedGraph(weights)


def format_weighted_edge_list(w: WeightedGraph) -> str:
    lines = [f"n {w.n}"]
    for u in range(w.n):
        for v in range(u, w.n):
            value = w.weight(u, v)
            if value:
                lines.append(f"{u} {v} {value!r}")
    return "\n".join(lines) + "\n"


def parse_vertex_map(
    text: str, source: str = "<string>", source_n: int | None = None, target_n: int | None = None
) -> VertexMap:
    images: dict[int, int] = {}
    for number, tokens in _content_lines(text):
        if len(tokens) != 3 or tokens[1] != "->":
            raise _fail(source, number, f"expected 'u -> v', got {' '.join(tokens)!r}")
        u = _int(tokens[0], source, number)
        v = _int(tokens[2], source, number)
        if u < 0 or v < 0:
            raise _fail(source, number, "vertex ids must be nonnegative")
        if u in images:
            raise _fail(source, number, f"duplicate source vertex {u}")
        if target_n is not None and v >= target_n:
            raise _fail(source, number, f"image {v} outside target of {target_n} vertices")
        images[u] = v
    count = source_n if source_n is not None else len(images)
    missing = [v for v in range(count) if v not in images]
    extra = [v for v in images if v >= count]
    if missing or extra:
        raise _fail(source, 0, f"map must cover 0..{count - 1} exactly (missing {missing[:5]})")
    width = target_n if target_n is not None else max(images.values(), default=-1) + 1
    try:
        return VertexMap.from_mapping(count, width, images)
    except PreconditionError as exc:
        raise _fail(source, 0, str(exc)) from None


def format_vertex_map(m: VertexMap) -> str:
    return "".join(f"{u} -> {v}\n" for u, v in enumerate(m.image))


def parse_hypergraph(text: str, source: str = "<string>") -> Hypergraph:
    """``n N f F`` header, optional ``parts`` line with ``|`` between parts, one edge per line.

    ``f 0`` declares mixed edge sizes.
    """
    lines = _content_lines(text)
    _, (n, f) = _read_header(lines, source, ("n", "f"))
    parts: list[list[int]] | None = None
    edges: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    for number, tokens in lines:
        if tokens[0] == "parts":
            if parts is not None or edges:
                raise _fail(source, number, "'parts' must come once, before the edges")
            parts = [[]]
            for token in tokens[1:]:
                if token == "|":
                    parts.append([])
                else:
                    parts[-1].append(_int(token, source, number))
            continue
        edge = tuple(sorted(_int(token, source, number) for token in tokens))
        if f and len(edge) != f:
            raise _fail(source, number, f"hyperedge {list(edge)} does not have size {f}")
        if len(set(edge)) != len(edge) or edge[0] < 0 or edge[-1] >= n:
            raise _fail(source, number, f"hyperedge {list(edge)} needs distinct ids below {n}")
        if edge in seen:
            raise _fail(source, number, f"duplicate hyperedge {list(edge)}")
        seen.add(edge)
        edges.append(edge)
    try:
        return Hypergraph.from_edges(n, edges, f or None, parts)
    except PreconditionError as exc:
        raise _fail(source, 0, str(exc)) from None


def format_hypergraph(h: Hypergraph) -> str:
    lines = [f"n {h.n} f {h.f or 0}"]
    if h.parts is not None:
        lines.append("parts " + " | ".join(" ".join(map(str, part)) for part in h.parts))
    lines.extend(" ".join(map(str, edge)) for edge in h.sorted_edges)
    return "\n".join(lines) + "\n"


def _label_lines(text: str, source: str) -> Iterator[tuple[int, int, list[str]]]:
    expected = 0
    for number, tokens in _content_lines(text):
        if len(tokens) < 3 or tokens[1] != ":":
            raise _fail(source, number, f"expected 'id : label', got {' '.join(tokens)!r}")
        vertex = _int(tokens[0], source, number)
        if vertex != expected:
            raise _fail(source, number, f"expected vertex {expected}, got {vertex}")
        expected += 1
        yield number, vertex, tokens[2:]


def parse_mycielski_labels(text: str, source: str = "<string>") -> list[MycielskiVertex]:
    labels: list[MycielskiVertex] = []
    for number, _, tokens in _label_lines(text, source):
        if tokens == ["r"]:
            labels.append(ROOT)
        elif len(tokens) == 2:
            base, layer = (_int(token, source, number) for token in tokens)
            if base < 0 or layer < 1:
                raise _fail(source, number, f"label ({base},{layer}) out of range")
            labels.append(MycielskiVertex(base, layer))
        else:
            raise _fail(source, number, f"expected 'r' or 'v i', got {' '.join(tokens)!r}")
    return labels


def format_mycielski_labels(labels: list[MycielskiVertex]) -> str:
    return "".join(f"{vertex} : {label.render()}\n" for vertex, label in enumerate(labels))


def parse_star_labels(text: str, source: str = "<string>") -> StarLabelling:
    """Rows ``id : base c_1 .. c_m``; Δ is the largest coordinate present."""
    bases: list[int] = []
    rows: list[list[int]] = []
    for number, _, tokens in _label_lines(text, source):
        values = [_int(token, source, number) for token in tokens]
        if rows and len(values) - 1 != len(rows[0]):
            raise _fail(source, number, f"expected {len(rows[0])} coordinates")
        if values[0] < 0 or any(c < 1 for c in values[1:]):
            raise _fail(source, number, "base must be nonnegative and coordinates at least 1")
        bases.append(values[0])
        rows.append(values[1:])
    if not rows:
        raise _fail(source, 0, "no labels")
    coords = np.array(rows, dtype=np.int64).reshape(len(rows), len(rows[0]))
    delta = int(coords.max()) if coords.size else 1
    return StarLabelling(delta, coords.shape[1], np.array(bases, dtype=np.int64), coords)


def format_star_labels(labelling: StarLabelling) -> str:
    rows = zip(labelling.bases.tolist(), labelling.coords.tolist())
    return "".join(
        f"{vertex} : " + " ".join(map(str, [base, *coords])) + "\n"
        for vertex, (base, coords) in enumerate(rows)
    )


def read_hypergraph(path: str | Path) -> Hypergraph:
    target = Path(path)
    return parse_hypergraph(_read(target), str(target))


def read_star_labels(path: str | Path) -> StarLabelling:
    target = Path(path)
    return parse_star_labels(_read(target), str(target))


def write_hypergraph(path: Path, h: Hypergraph) -> None:
    write_text(path, format_hypergraph(h))


def write_mycielski_labels(path: Path, labels: list[MycielskiVertex]) -> None:
    write_text(path, format_mycielski_labels(labels))


def write_star_labels(path: Path, labelling: StarLabelling) -> None:
    write_text(path, format_star_labels(labelling))


def read_graph(path: str | Path) -> Graph:
    target = Path(path)
    return parse_edge_list(_read(target), str(target))


def read_vertex_map(
    path: str | Path, source_n: int | None = None, target_n: int | None = None
) -> VertexMap:
    target = Path(path)
    return parse_vertex_map(_read(target), str(target), source_n, target_n)


def write_graph(path: Path, g: Graph) -> None:
    write_text(path, format_edge_list(g))


def write_vertex_map(path: Path, m: VertexMap) -> None:
    write_text(path, format_vertex_map(m))


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputFormatError(f"INVALID_INPUT: {path}:0: file not found") from None
    except UnicodeDecodeError:
        raise InputFormatError(f"INVALID_INPUT: {path}:0: not UTF-8 text") from None
