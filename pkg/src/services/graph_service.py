"""
Graph Service - neighbourhoods, deletions, densities and the 2-density solvers.
"""
import json
import logging
from collections import deque
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from src.config.settings import M2_BRUTE_FORCE_CAP
from src.models.graph import (
    Graph,
    GraphDocument,
    GraphError,
    PartitionedGraph,
    PartitionedGraphDocument,
    TwoDensityResult,
)

logger = logging.getLogger(__name__)

INT32_MAX = 2**31 - 1


# NEIGHBOURHOODS

def neighborhood(g: Graph, vertices: Iterable[int]) -> np.ndarray:
    """Sorted union of the neighbour lists of `vertices`."""
    chunks = [g.neighbors(int(v)) for v in vertices]
    if not chunks:
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate(chunks))


def iterated_neighborhood(g: Graph, v: int, part_sequence: Sequence[Iterable[int]]) -> frozenset[int]:
    """
    Layered neighbourhood N^i(v): start at {v}, step to neighbours inside
    the next set of `part_sequence`, return the last layer.

    Args:
        g: Host graph
        v: Start vertex
        part_sequence: Non-empty list of vertex sets, one per layer

    Returns:
        The final layer (possibly empty)
    """
    if not part_sequence:
        raise GraphError("part_sequence must be non-empty")
    layer = np.array([v], dtype=np.int64)
    for block in part_sequence:
        if layer.size == 0:
            return frozenset()
        allowed = g.mask(block)
        nbrs = neighborhood(g, layer)
        layer = nbrs[allowed[nbrs]]
    return frozenset(layer.tolist())


def second_neighborhood(g: Graph, v: int) -> frozenset[int]:
    """Endpoints of length-2 paths from v, v itself excluded."""
    reach = neighborhood(g, g.neighbors(v))
    return frozenset(reach[reach != v].tolist())


def bfs_layer(g: Graph, sources: Iterable[int], depth: int) -> frozenset[int]:
    """Vertices at distance exactly `depth` from the source set."""
    seen = g.mask(sources)
    frontier = np.flatnonzero(seen)
    for _ in range(depth):
        if frontier.size == 0:
            break
        nbrs = neighborhood(g, frontier)
        frontier = nbrs[~seen[nbrs]]
        seen[frontier] = True
    return frozenset(frontier.tolist())


# DELETIONS

def remove_vertices(g: Graph, X: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """
    Induced subgraph on V(g) minus X with ids compacted.

    Returns:
        (new graph, map old id -> new id for surviving vertices)
    """
    drop = g.mask(X)
    keep = ~drop
    new_id = np.cumsum(keep) - 1
    e = g.edges
    alive = keep[e[:, 0]] & keep[e[:, 1]]
    sub = Graph(int(keep.sum()), new_id[e[alive]])
    id_map = {int(old): int(new_id[old]) for old in np.flatnonzero(keep)}
    return sub, id_map


def remove_closed_edge_set(g: Graph, X: Iterable[int]) -> Graph:
    """G - ∇(X): same vertex set, every edge touching X removed."""
    hit = g.mask(X)
    e = g.edges
    return Graph(g.n, e[~(hit[e[:, 0]] | hit[e[:, 1]])])


def remove_edges_within(g: Graph, X: Iterable[int]) -> Graph:
    """Same vertex set, every edge with both endpoints in X removed."""
    inside = g.mask(X)
    e = g.edges
    return Graph(g.n, e[~(inside[e[:, 0]] & inside[e[:, 1]])])


# DENSITIES

def count_edges_between(g: Graph, X: Iterable[int], Y: Iterable[int]) -> int:
    """e(X, Y): edges with one endpoint in X and the other in Y."""
    mx, my = g.mask(X), g.mask(Y)
    a, b = g.edges[:, 0], g.edges[:, 1]
    return int(np.count_nonzero((mx[a] & my[b]) | (my[a] & mx[b])))


def bipartite_density(g: Graph, X: Iterable[int], Y: Iterable[int]) -> Fraction:
    """
    d(X, Y) = e(X, Y) / (|X||Y|) as an exact rational.

    Raises:
        GraphError: If either set is empty or the sets overlap
    """
    X, Y = frozenset(X), frozenset(Y)
    if not X or not Y:
        raise GraphError("density of an empty set is undefined")
    if X & Y:
        raise GraphError("density sets must be disjoint")
    return Fraction(count_edges_between(g, X, Y), len(X) * len(Y))


def two_density_exact(g: Graph) -> TwoDensityResult:
    """
    m_2(g) by enumerating every vertex subset.

    Ties are broken by fewest vertices, then lowest subset bitmask.

    Raises:
        GraphError: Fewer than 2 edges, or more vertices than M2_BRUTE_FORCE_CAP
    """
    if g.num_edges < 2:
        raise GraphError("m_2 is undefined for graphs with fewer than 2 edges")
    if g.n > M2_BRUTE_FORCE_CAP:
        raise GraphError(
            f"{g.n} vertices exceeds the brute-force cap {M2_BRUTE_FORCE_CAP}; use two_density_flow"
        )

    masks = np.arange(1 << g.n, dtype=np.int64)
    sizes = np.zeros(len(masks), dtype=np.int64)
    for v in range(g.n):
        sizes += (masks >> v) & 1
    counts = np.zeros(len(masks), dtype=np.int64)
    for u, v in g.edges:
        counts += ((masks >> int(u)) & 1) & ((masks >> int(v)) & 1)

    eligible = np.flatnonzero(counts >= 2)
    num = counts[eligible] - 1
    den = sizes[eligible] - 2
    # distinct ratios with denominators below 16 are far apart in float
    approx = num / den
    top = approx.max()
    close = eligible[np.isclose(approx, top, rtol=0, atol=1e-9)]
    value = max(Fraction(int(counts[m]) - 1, int(sizes[m]) - 2) for m in close)
    ties = [m for m in close if Fraction(int(counts[m]) - 1, int(sizes[m]) - 2) == value]
    best = min(ties, key=lambda m: (int(sizes[m]), int(m)))

    witness = tuple(v for v in range(g.n) if (int(best) >> v) & 1)
    return TwoDensityResult(value=value, witness=witness, edge_count=int(counts[best]), method="exact")


def two_density_flow(g: Graph) -> TwoDensityResult:
    """
    m_2(g) via forced-pair min-cuts on the 2-core.

    Every subgraph with m_2 > 1 contains a cycle, hence an edge outside a
    spanning forest. For each such edge uv the solver maximises
    e(S) - λ|S| over S ⊇ {u, v} as a min-cut, raises λ to d_2(S) while that
    maximum beats 1 - 2λ, then deletes uv and re-peels the 2-core.

    Raises:
        GraphError: If g has fewer than 2 edges
    """
    if g.num_edges < 2:
        raise GraphError("m_2 is undefined for graphs with fewer than 2 edges")

    deg = g.degrees()
    hub = int(np.argmax(deg))
    if deg[hub] >= 2:
        nbrs = g.neighbors(hub)
        best = Fraction(1)
        witness = frozenset({hub, int(nbrs[0]), int(nbrs[1])})
    else:
        best = Fraction(1, 2)
        witness = frozenset(int(x) for x in g.edges[:2].ravel())

    core = _TwoCore(g)
    for idx in core.non_tree_edges():
        if not core.edge_alive[idx]:
            continue
        u, v = (int(x) for x in core.edges[idx])
        while True:
            S = _max_forced_set(core, u, v, best)
            e_S = g.induced_edge_count(S)
            if len(S) > 2 and Fraction(e_S - 1, len(S) - 2) > best:
                best = Fraction(e_S - 1, len(S) - 2)
                witness = S
                logger.debug("m_2 raised to %s on %d vertices", best, len(S))
            else:
                break
        core.delete_edge(idx)

    return TwoDensityResult(
        value=best,
        witness=tuple(sorted(witness)),
        edge_count=g.induced_edge_count(witness),
        method="flow",
    )


class _TwoCore:
    """Mutable 2-core of a graph supporting edge deletion with re-peeling."""

    def __init__(self, g: Graph):
        self.n = g.n
        self.edges = g.edges
        self.edge_alive = np.ones(len(self.edges), dtype=bool)
        self.vertex_alive = np.ones(g.n, dtype=bool)
        self.deg = g.degrees().astype(np.int64)
        self.incident: list[list[int]] = [[] for _ in range(g.n)]
        for i, (a, b) in enumerate(self.edges.tolist()):
            self.incident[a].append(i)
            self.incident[b].append(i)
        self._peel(np.flatnonzero(self.deg < 2).tolist())

    def _peel(self, queue: list[int]) -> None:
        queue = deque(queue)
        while queue:
            x = queue.popleft()
            if not self.vertex_alive[x] or self.deg[x] >= 2:
                continue
            self.vertex_alive[x] = False
            for i in self.incident[x]:
                if self.edge_alive[i]:
                    self.edge_alive[i] = False
                    a, b = self.edges[i]
                    y = int(b) if int(a) == x else int(a)
                    self.deg[x] -= 1
                    self.deg[y] -= 1
                    if self.deg[y] < 2:
                        queue.append(y)

    def delete_edge(self, i: int) -> None:
        if not self.edge_alive[i]:
            return
        self.edge_alive[i] = False
        a, b = (int(x) for x in self.edges[i])
        self.deg[a] -= 1
        self.deg[b] -= 1
        self._peel([a, b])

    def non_tree_edges(self) -> list[int]:
        """Alive edges not in a union-find spanning forest, in edge order."""
        parent = list(range(self.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        extra = []
        for i in np.flatnonzero(self.edge_alive).tolist():
            a, b = (int(x) for x in self.edges[i])
            ra, rb = find(a), find(b)
            if ra == rb:
                extra.append(i)
            else:
                parent[ra] = rb
        return extra


def _max_forced_set(core: _TwoCore, u: int, v: int, lam: Fraction) -> frozenset[int]:
    """
    Source side of a min-cut maximising e(S) - lam*|S| over S ⊇ {u, v}
    inside the current 2-core.
    """
    p, q = lam.numerator, lam.denominator
    verts = np.flatnonzero(core.vertex_alive)
    local = np.full(core.n, -1, dtype=np.int64)
    local[verts] = np.arange(len(verts))
    e = core.edges[core.edge_alive]
    a, b = local[e[:, 0]], local[e[:, 1]]

    N = len(verts)
    s, t = N, N + 1
    w = q * core.deg[verts] - 2 * p
    sink_caps = np.where(w < 0, -w, 0)
    inf = int(sink_caps.sum()) + 1
    src_caps = np.where(w > 0, w, 0)
    src_caps[local[u]] = inf
    src_caps[local[v]] = inf

    total = int(src_caps.sum()) + 2 * q * len(e)
    if total > INT32_MAX:
        return _max_forced_set_nx(verts, a, b, src_caps, sink_caps, q)

    pos, neg = np.flatnonzero(src_caps), np.flatnonzero(sink_caps)
    rows = np.concatenate([a, b, np.full(len(pos), s), neg])
    cols = np.concatenate([b, a, pos, np.full(len(neg), t)])
    caps = np.concatenate([np.full(2 * len(e), q), src_caps[pos], sink_caps[neg]])
    cap = sparse.csr_matrix((caps.astype(np.int32), (rows, cols)), shape=(N + 2, N + 2))

    result = maximum_flow(cap, s, t)
    residual = (cap - result.flow).tocsr()
    residual.data[residual.data < 0] = 0
    residual.eliminate_zeros()
    side = breadth_first_order(residual, s, directed=True, return_predecessors=False)
    side = side[side < N]
    return frozenset(verts[side].tolist())


def _max_forced_set_nx(verts, a, b, src_caps, sink_caps, q) -> frozenset[int]:
    """networkx fallback when capacities do not fit in int32."""
    flow = nx.DiGraph()
    flow.add_nodes_from(["s", "t"])
    for x, y in zip(a.tolist(), b.tolist()):
        flow.add_edge(x, y, capacity=q)
        flow.add_edge(y, x, capacity=q)
    for x in np.flatnonzero(src_caps).tolist():
        flow.add_edge("s", x, capacity=int(src_caps[x]))
    for x in np.flatnonzero(sink_caps).tolist():
        flow.add_edge(x, "t", capacity=int(sink_caps[x]))
    _, (source_side, _) = nx.minimum_cut(flow, "s", "t")
    return frozenset(int(verts[x]) for x in source_side if x != "s")


# EXPORT / IO

def to_dot(g: Graph, roles: dict[int, str] | None = None, colors: dict[int, str] | None = None,
           name: str = "G") -> str:
    """Render g as DOT, labelling vertices with their roles when given."""
    lines = [f"graph {name} {{"]
    for v in range(g.n):
        attrs = []
        if roles and v in roles:
            attrs.append(f'label="{v}: {roles[v]}"')
        if colors and v in colors:
            attrs.append(f'style=filled fillcolor="{colors[v]}"')
        lines.append(f"  {v}" + (f" [{' '.join(attrs)}]" if attrs else "") + ";")
    for u, v in g.edge_list():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_graph(path: str | Path) -> Graph:
    """
    Load a graph JSON file ({"n": .., "edges": [...]}).

    Raises:
        GraphError: If the file is missing or malformed
    """
    try:
        doc = GraphDocument.model_validate_json(Path(path).read_text(encoding="utf-8"))
        return doc.to_graph()
    except FileNotFoundError as e:
        raise GraphError(f"graph file not found: {path}") from e
    except ValueError as e:
        raise GraphError(f"malformed graph file {path}: {e}") from e


def load_partitioned(path: str | Path) -> PartitionedGraph:
    """Load a partitioned graph JSON file (graph fields plus "parts" and "v0")."""
    try:
        doc = PartitionedGraphDocument.model_validate_json(Path(path).read_text(encoding="utf-8"))
        return doc.to_partitioned()
    except FileNotFoundError as e:
        raise GraphError(f"graph file not found: {path}") from e
    except ValueError as e:
        raise GraphError(f"malformed partitioned graph file {path}: {e}") from e


def graph_to_json(g: Graph | PartitionedGraph) -> str:
    if isinstance(g, PartitionedGraph):
        doc = PartitionedGraphDocument.from_partitioned(g)
    else:
        doc = GraphDocument.from_graph(g)
    return json.dumps(doc.model_dump(mode="json"), sort_keys=True)


def save_graph(g: Graph | PartitionedGraph, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(graph_to_json(g) + "\n", encoding="utf-8")
    return path


def make_partitioned(g: Graph, parts: Sequence[Iterable[int]], exceptional: Iterable[int] = ()) -> PartitionedGraph:
    """
    Wrap g with a part labelling.

    Raises:
        GraphError: If the parts are not a valid partition
    """
    try:
        return PartitionedGraph(
            graph=g,
            parts=tuple(frozenset(int(x) for x in p) for p in parts),
            exceptional=frozenset(int(x) for x in exceptional),
        )
    except ValueError as e:
        raise GraphError(f"invalid partition: {e}") from e


def complete_blowup(t: int, n_tilde: int) -> PartitionedGraph:
    """Complete blow-up of C_t with parts of size n_tilde: part i is ids i*n_tilde..."""
    parts = [range(i * n_tilde, (i + 1) * n_tilde) for i in range(t)]
    edges = []
    for i in range(t):
        j = (i + 1) % t
        for x in parts[i]:
            for y in parts[j]:
                edges.append((x, y))
    return make_partitioned(Graph(t * n_tilde, edges), parts)
