from fractions import Fraction

import numpy as np
import pytest

from src.models.graph import Graph, GraphError
from src.services.graph_service import (
    bfs_layer,
    bipartite_density,
    complete_blowup,
    iterated_neighborhood,
    load_graph,
    load_partitioned,
    make_partitioned,
    remove_closed_edge_set,
    remove_vertices,
    save_graph,
    second_neighborhood,
    two_density_exact,
    two_density_flow,
)
from tests.helpers import bipartite_pair, complete_graph, cycle_graph, path_graph


def _random_graph(rng: np.random.Generator, max_n: int = 12) -> Graph:
    n = int(rng.integers(3, max_n + 1))
    p = float(rng.uniform(0.15, 0.85))
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph(n, edges)


# GRAPH

def test_graph_rejects_self_loops_and_parallel_edges():
    with pytest.raises(GraphError):
        Graph(3, [(1, 1)])
    with pytest.raises(GraphError):
        Graph(3, [(0, 1), (1, 0)])
    assert Graph(3, [(0, 1), (1, 0)], dedupe=True).num_edges == 1


def test_graph_rejects_out_of_range_endpoint():
    with pytest.raises(GraphError):
        Graph(2, [(0, 2)])


def test_neighbors_are_sorted():
    g = Graph(5, [(0, 4), (0, 2), (0, 1)])
    assert g.neighbors(0).tolist() == [1, 2, 4]
    assert g.degree(0) == 3
    assert g.has_edge(2, 0) and not g.has_edge(1, 2)


# NEIGHBOURHOODS

def test_iterated_neighborhood_follows_forced_path():
    g = path_graph(3)
    assert iterated_neighborhood(g, 0, [{1}, {2}]) == frozenset({2})


def test_iterated_neighborhood_complete_bipartite():
    g = Graph(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
    assert iterated_neighborhood(g, 0, [{2, 3}]) == frozenset({2, 3})


def test_iterated_neighborhood_blowup_reaches_whole_part():
    pg = complete_blowup(3, 4)
    assert iterated_neighborhood(pg.graph, 0, [pg.part(1), pg.part(2)]) == pg.part(2)


def test_iterated_neighborhood_needs_a_sequence():
    with pytest.raises(GraphError):
        iterated_neighborhood(path_graph(3), 0, [])


def test_second_neighborhood_excludes_start():
    assert second_neighborhood(path_graph(3), 0) == frozenset({2})
    assert second_neighborhood(complete_graph(4), 0) == frozenset({1, 2, 3})


def test_bfs_layer_is_exact_distance():
    g = path_graph(5)
    assert bfs_layer(g, [0], 2) == frozenset({2})
    assert bfs_layer(g, [0, 4], 1) == frozenset({1, 3})


# DELETIONS

def test_remove_vertex_from_triangle_leaves_an_edge():
    sub, id_map = remove_vertices(complete_graph(3), [2])
    assert sub.n == 2 and sub.num_edges == 1
    assert id_map == {0: 0, 1: 1}


def test_remove_nothing_is_identity():
    g = cycle_graph(5)
    sub, _ = remove_vertices(g, [])
    assert sub == g
    assert remove_closed_edge_set(g, []) == g


def test_c5_minus_adjacent_pair_is_p3():
    sub, _ = remove_vertices(cycle_graph(5), [0, 1])
    assert sub.n == 3
    assert sorted(sub.degrees().tolist()) == [1, 1, 2]


def test_remove_closed_edge_set_keeps_vertices():
    h = remove_closed_edge_set(complete_graph(4), [0])
    assert h.n == 4 and h.num_edges == 3 and h.degree(0) == 0

    h = remove_closed_edge_set(cycle_graph(6), [0])
    assert h.n == 6 and h.num_edges == 4 and h.degree(0) == 0


# DENSITIES

def test_bipartite_density_examples():
    g, X, Y = bipartite_pair(3, 3, [(i, j) for i in range(3) for j in range(3)])
    assert bipartite_density(g, X, Y) == 1
    g, X, Y = bipartite_pair(3, 3, [])
    assert bipartite_density(g, X, Y) == 0
    g, X, Y = bipartite_pair(4, 4, [(i, i) for i in range(4)])
    assert bipartite_density(g, X, Y) == Fraction(1, 4)


def test_bipartite_density_rejects_empty_side():
    g, X, _ = bipartite_pair(2, 2, [(0, 0)])
    with pytest.raises(GraphError):
        bipartite_density(g, X, [])


@pytest.mark.parametrize("g, expected", [
    (cycle_graph(4), Fraction(3, 2)),
    (cycle_graph(5), Fraction(4, 3)),
    (complete_graph(4), Fraction(5, 2)),
])
def test_two_density_exact_examples(g, expected):
    result = two_density_exact(g)
    assert result.value == expected
    assert result.method == "exact"


def test_two_density_exact_preconditions():
    with pytest.raises(GraphError):
        two_density_exact(Graph(3, [(0, 1)]))
    with pytest.raises(GraphError):
        two_density_exact(cycle_graph(17))


def test_two_density_flow_examples():
    assert two_density_flow(cycle_graph(7)).value == Fraction(6, 5)
    assert two_density_flow(path_graph(3)).value == 1
    assert two_density_flow(Graph(4, [(0, 1), (2, 3)])).value == Fraction(1, 2)


@pytest.mark.parametrize("t", range(3, 9))
def test_two_density_of_cycles(t):
    expected = Fraction(t - 1, t - 2)
    assert two_density_flow(cycle_graph(t)).value == expected
    assert two_density_exact(cycle_graph(t)).value == expected


def test_two_density_flow_witness_attains_value():
    g = complete_graph(5)
    result = two_density_flow(g)
    e = g.induced_edge_count(result.witness)
    assert Fraction(e - 1, len(result.witness) - 2) == result.value == Fraction(3)


def _random_connected_edges(rng: np.random.Generator, n: int, offset: int) -> list[tuple[int, int]]:
    """Random spanning tree on offset..offset+n-1 plus each other pair with probability 2/5."""
    edges = {(int(rng.integers(v)), v) for v in range(1, n)}
    edges |= {(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.4}
    return [(u + offset, v + offset) for u, v in edges]


@pytest.mark.parametrize("seed", range(40))
def test_two_density_of_graphs_glued_at_a_vertex(seed):
    rng = np.random.default_rng(seed)
    n1, n2 = (int(x) for x in rng.integers(3, 8, size=2))
    first = _random_connected_edges(rng, n1, 0)
    # second graph's vertex 0 is the first graph's last vertex
    second = _random_connected_edges(rng, n2, n1 - 1)
    h1 = Graph(n1, first)
    h2 = Graph(n2, [(u - n1 + 1, v - n1 + 1) for u, v in second])
    union = Graph(n1 + n2 - 1, first + second)
    assert union.num_edges == h1.num_edges + h2.num_edges
    expected = max(two_density_flow(h1).value, two_density_flow(h2).value)
    assert two_density_flow(union).value == expected


def _flow_matches_exact(seed: int, count: int) -> int:
    rng = np.random.default_rng(seed)
    mismatches = checked = 0
    while checked < count:
        g = _random_graph(rng)
        if g.num_edges < 2:
            continue
        checked += 1
        if two_density_flow(g).value != two_density_exact(g).value:
            mismatches += 1
    return mismatches


def test_two_density_flow_matches_brute_force():
    assert _flow_matches_exact(seed=2024, count=150) == 0


@pytest.mark.slow
def test_two_density_flow_matches_brute_force_1000_graphs():
    assert _flow_matches_exact(seed=7, count=1000) == 0


# IO

def test_graph_file_round_trip(tmp_path):
    g = cycle_graph(6)
    path = save_graph(g, tmp_path / "c6.json")
    assert load_graph(path) == g


def test_partitioned_file_round_trip(tmp_path):
    pg = complete_blowup(3, 2)
    path = save_graph(pg, tmp_path / "pg.json")
    loaded = load_partitioned(path)
    assert loaded.graph == pg.graph
    assert loaded.parts == pg.parts


def test_load_graph_errors(tmp_path):
    with pytest.raises(GraphError):
        load_graph(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "edges": [[0, 5]]}')
    with pytest.raises(GraphError):
        load_graph(bad)


def test_make_partitioned_validates_partition():
    g = cycle_graph(6)
    with pytest.raises(GraphError):
        make_partitioned(g, [[0, 1], [1, 2], [3, 4, 5]])
    with pytest.raises(GraphError):
        make_partitioned(g, [[0, 1], [2, 3], [4]])
    pg = make_partitioned(g, [[0, 3], [1, 4], [2, 5]])
    assert pg.t == 3 and pg.n_tilde == 2
    assert pg.part(-1) == frozenset({2, 5})
    assert pg.part_of(4) == 1
