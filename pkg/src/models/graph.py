"""
Graph and PartitionedGraph - the substrate every other module works on.

Graph is a plain immutable class backed by numpy CSR arrays so that
G(n,p) samples with millions of edges stay cheap. JSON documents go
through the pydantic models at the bottom of this file.
"""
from functools import cached_property
from typing import Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy import sparse

from src.models.common import Rational


class GraphError(ValueError):
    """Raised when a graph or partition is malformed."""
    pass


class Graph:
    """
    Simple undirected graph on vertex ids 0..n-1.

    Edges are stored once as sorted (lo, hi) pairs; adjacency is CSR with
    sorted neighbour lists. Instances never change after construction.
    """

    def __init__(self, n: int, edges: Iterable = (), *, dedupe: bool = False):
        if n < 0:
            raise GraphError(f"vertex count must be non-negative, got {n}")
        if isinstance(edges, np.ndarray):
            arr = edges.astype(np.int64, copy=False).reshape(-1, 2)
        else:
            arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)

        if arr.size:
            if arr.min() < 0 or arr.max() >= n:
                raise GraphError(f"edge endpoint outside [0, {n})")
            lo = np.minimum(arr[:, 0], arr[:, 1])
            hi = np.maximum(arr[:, 0], arr[:, 1])
            if np.any(lo == hi):
                v = int(lo[lo == hi][0])
                raise GraphError(f"self-loop at vertex {v}")
            keys = lo * n + hi
            uniq = np.unique(keys)
            if len(uniq) != len(keys) and not dedupe:
                raise GraphError("parallel edges are not allowed")
            lo, hi = uniq // n, uniq % n
        else:
            lo = hi = np.zeros(0, dtype=np.int64)

        self._n = int(n)
        self._edges = np.stack([lo, hi], axis=1) if len(lo) else np.zeros((0, 2), dtype=np.int64)
        self._edges.flags.writeable = False

        # CSR, both directions
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        self._indices = dst[order]
        counts = np.bincount(src, minlength=n) if n else np.zeros(0, dtype=np.int64)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._indices.flags.writeable = False
        self._indptr.flags.writeable = False

    # BASIC ACCESSORS

    @property
    def n(self) -> int:
        return self._n

    @property
    def vertex_count(self) -> int:
        return self._n

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> np.ndarray:
        """(m, 2) array of (lo, hi) pairs in lexicographic order."""
        return self._edges

    def edge_list(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self._edges]

    def neighbors(self, v: int) -> np.ndarray:
        return self._indices[self._indptr[v]:self._indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self._indptr[v + 1] - self._indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        """Per-vertex neighbour sets, for search code that needs fast membership."""
        return tuple(frozenset(self.neighbors(v).tolist()) for v in range(self._n))

    def mask(self, vertices: Iterable[int]) -> np.ndarray:
        m = np.zeros(self._n, dtype=bool)
        idx = np.fromiter(vertices, dtype=np.int64)
        if idx.size:
            m[idx] = True
        return m

    def induced_edge_count(self, vertices: Iterable[int]) -> int:
        m = self.mask(vertices)
        return int(np.count_nonzero(m[self._edges[:, 0]] & m[self._edges[:, 1]]))

    def to_sparse(self) -> sparse.csr_matrix:
        data = np.ones(len(self._indices), dtype=np.int64)
        return sparse.csr_matrix((data, self._indices, self._indptr), shape=(self._n, self._n))

    # DUNDER

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self) -> int:
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self.num_edges})"


class PartitionedGraph(BaseModel):
    """
    A graph with parts V_1..V_t (0-based here) and an optional exceptional set V_0.

    part(i) wraps cyclically, so part(-1) is the last part.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    graph: Graph = Field(description="Host graph")
    parts: tuple[frozenset[int], ...] = Field(description="Parts V_1..V_t as vertex sets")
    exceptional: frozenset[int] = Field(default=frozenset(), description="Exceptional set V_0")

    _part_of: np.ndarray = PrivateAttr()

    @model_validator(mode="after")
    def _check_partition(self) -> "PartitionedGraph":
        if len(self.parts) < 3:
            raise GraphError(f"need at least 3 parts, got {len(self.parts)}")
        seen: set[int] = set()
        for block in (*self.parts, self.exceptional):
            if seen & block:
                raise GraphError("parts are not pairwise disjoint")
            seen |= block
        if seen != set(range(self.graph.n)):
            raise GraphError("parts plus exceptional set must cover the vertex set exactly")
        return self

    def model_post_init(self, __context) -> None:
        part_of = np.full(self.graph.n, -1, dtype=np.int64)
        for i, block in enumerate(self.parts):
            if block:
                part_of[np.fromiter(block, dtype=np.int64)] = i
        self._part_of = part_of

    @property
    def t(self) -> int:
        return len(self.parts)

    @property
    def n_tilde(self) -> int:
        """Common part size; raises if the parts are unequal."""
        sizes = {len(p) for p in self.parts}
        if len(sizes) != 1:
            raise GraphError(f"parts have unequal sizes {sorted(sizes)}")
        return sizes.pop()

    def part(self, i: int) -> frozenset[int]:
        return self.parts[i % self.t]

    def part_of(self, v: int) -> int:
        """Part index of v, or -1 for the exceptional set."""
        return int(self._part_of[v])

    @property
    def part_labels(self) -> np.ndarray:
        return self._part_of


class TwoDensityResult(BaseModel):
    """Exact 2-density with a maximising witness."""
    model_config = ConfigDict(frozen=True)

    value: Rational = Field(description="m_2 as an exact rational")
    witness: tuple[int, ...] = Field(description="Sorted vertex set inducing the maximiser")
    edge_count: int = Field(description="Edges induced by the witness")
    method: str = Field(default="exact", description="Solver that produced the value")


# JSON DOCUMENTS

class GraphDocument(BaseModel):
    """On-disk graph: {"n": int, "edges": [[u, v], ...]}."""
    n: int = Field(ge=0, description="Vertex count")
    edges: list[tuple[int, int]] = Field(default_factory=list, description="Edge list")

    def to_graph(self) -> Graph:
        return Graph(self.n, self.edges)

    @classmethod
    def from_graph(cls, g: Graph) -> "GraphDocument":
        return cls(n=g.n, edges=g.edge_list())


class PartitionedGraphDocument(GraphDocument):
    """Graph document plus "parts" and "v0"."""
    parts: list[list[int]] = Field(description="Parts V_1..V_t")
    v0: list[int] = Field(default_factory=list, description="Exceptional vertices")

    def to_partitioned(self) -> PartitionedGraph:
        return PartitionedGraph(
            graph=self.to_graph(),
            parts=tuple(frozenset(p) for p in self.parts),
            exceptional=frozenset(self.v0),
        )

    @classmethod
    def from_partitioned(cls, pg: PartitionedGraph) -> "PartitionedGraphDocument":
        return cls(
            n=pg.graph.n,
            edges=pg.graph.edge_list(),
            parts=[sorted(p) for p in pg.parts],
            v0=sorted(pg.exceptional),
        )
