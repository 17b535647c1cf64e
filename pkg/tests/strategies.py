from hypothesis import strategies as st

from homforge.graph_core import Graph


@st.composite
def graphs(draw, min_n: int = 0, max_n: int = 7) -> Graph:
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen)


@st.composite
def vertex_maps(draw, src: Graph, target_n: int) -> tuple[int, ...]:
    return tuple(
        draw(st.integers(min_value=0, max_value=target_n - 1)) for _ in range(src.n)
    )


@st.composite
def layered_graphs(
    draw, max_t: int = 2, max_layer: int = 3, max_rest: int = 3
) -> tuple[Graph, list[list[int]]]:
    """A graph whose distance layers from an independent set I are independent.

    Returns the graph and its layers I, N^1(I), ..., N^t(I); the vertices after the last
    layer are at distance above t from I.
    """
    t = draw(st.integers(min_value=1, max_value=max_t))
    layers: list[list[int]] = []
    next_id = 0
    for _ in range(t + 1):
        size = draw(st.integers(min_value=1, max_value=max_layer))
        layers.append(list(range(next_id, next_id + size)))
        next_id += size
    rest = list(range(next_id, next_id + draw(st.integers(min_value=0, max_value=max_rest))))
    edges: set[tuple[int, int]] = set()
    for depth in range(1, t + 1):
        for v in layers[depth]:
            edges.add((draw(st.sampled_from(layers[depth - 1])), v))
    optional = [
        (a, b) for depth in range(t) for a in layers[depth] for b in layers[depth + 1]
    ]
    optional += [(a, b) for a in layers[t] for b in rest]
    optional += [(a, b) for i, a in enumerate(rest) for b in rest[i + 1:]]
    if optional:
        edges.update(draw(st.lists(st.sampled_from(optional), unique=True)))
    return Graph.from_edges(next_id + len(rest), edges), layers
