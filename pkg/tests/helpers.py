"""Small graph builders shared by the test modules."""
from src.models.graph import Graph
from src.services.graph_service import make_partitioned


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def bipartite_pair(nx: int, ny: int, edges) -> tuple[Graph, list[int], list[int]]:
    """Pair X = 0..nx-1, Y = nx..nx+ny-1 with edges given as (x index, y index)."""
    X = list(range(nx))
    Y = list(range(nx, nx + ny))
    return Graph(nx + ny, [(X[i], Y[j]) for i, j in edges]), X, Y


def partitioned(g: Graph, t: int, n_tilde: int):
    """Parts i*ñ .. (i+1)*ñ - 1."""
    return make_partitioned(g, [range(i * n_tilde, (i + 1) * n_tilde) for i in range(t)])
