from itertools import combinations

import numpy as np
import pytest

from src.models.factor import Hypergraph, Matching
from src.services.matching_service import (
    MatchingError,
    check_haxell_condition,
    find_haxell_violation,
    find_saturating_matching,
    verify_matching,
)


def _hypergraph(A, B, edges) -> Hypergraph:
    return Hypergraph(
        vertices=frozenset(A) | frozenset(B),
        edges=tuple(frozenset(e) for e in edges),
        side_a=frozenset(A),
    )


def _random_instance(rng: np.random.Generator, max_a: int, max_b: int, max_edges: int, ell: int | None = None):
    a = int(rng.integers(1, max_a + 1))
    ell = int(rng.integers(2, 4)) if ell is None else ell
    b = int(rng.integers(ell - 1, max_b + 1))
    A = list(range(a))
    B = list(range(a, a + b))
    edges = []
    for _ in range(int(rng.integers(0, max_edges + 1))):
        x = int(rng.choice(A))
        ys = rng.choice(B, size=ell - 1, replace=False).tolist()
        edges.append({x, *ys})
    return _hypergraph(A, B, edges)


def _oracle(h: Hypergraph) -> bool:
    """Brute force over every set of edges."""
    edges = list(h.edges)
    for size in range(len(h.side_a), len(edges) + 1):
        for chosen in combinations(edges, size):
            covered = set()
            disjoint = True
            for e in chosen:
                if covered & e:
                    disjoint = False
                    break
                covered |= e
            if disjoint and h.side_a <= covered:
                return True
    return False


# MATCHING

def test_single_edge_is_matched():
    h = _hypergraph([0], [1, 2], [{0, 1, 2}])
    result = find_saturating_matching(h)
    assert result.status == "found"
    assert result.matching.edges == (0,)
    assert verify_matching(h, result.matching, h.side_a)


def test_shared_b_pair_blocks_matching():
    h = _hypergraph([0, 1], [2, 3], [{0, 2, 3}, {1, 2, 3}])
    assert find_saturating_matching(h).status == "none"


def test_empty_side_a_is_found():
    h = _hypergraph([], [1, 2], [])
    assert find_saturating_matching(h).status == "found"


def test_edge_meeting_a_twice_is_rejected():
    h = _hypergraph([0, 1], [2], [{0, 1, 2}])
    with pytest.raises(MatchingError):
        find_saturating_matching(h)


def test_mixed_edge_sizes_are_rejected():
    h = _hypergraph([0, 1], [2, 3, 4], [{0, 2}, {1, 3, 4}])
    with pytest.raises(MatchingError):
        find_saturating_matching(h)


def test_verify_matching_rejects_overlap():
    h = _hypergraph([0, 1], [2, 3], [{0, 2}, {1, 2}, {1, 3}])
    result = find_saturating_matching(h)
    assert result.status == "found"
    assert verify_matching(h, result.matching, h.side_a)
    assert not verify_matching(h, Matching(edges=(0, 1)), h.side_a)


def test_random_3_uniform_instances_match_oracle():
    rng = np.random.default_rng(3)
    A, B = list(range(4)), list(range(4, 16))
    for _ in range(60):
        edges = []
        for _ in range(int(rng.integers(4, 11))):
            edges.append({int(rng.choice(A)), *rng.choice(B, size=2, replace=False).tolist()})
        h = _hypergraph(A, B, edges)
        found = find_saturating_matching(h).status == "found"
        assert found == _oracle(h)


# HAXELL

def test_haxell_single_edge():
    h = _hypergraph([0], [1, 2], [{0, 1, 2}])
    assert check_haxell_condition(h)


def test_haxell_edgeless_fails():
    h = _hypergraph([0], [1, 2], [])
    assert not check_haxell_condition(h)
    assert find_haxell_violation(h) == (0,)


def test_haxell_is_hall_for_graphs():
    # bipartite graphs: the condition is Hall's
    h = _hypergraph([0, 1], [2, 3], [{0, 2}, {1, 2}])
    assert not check_haxell_condition(h)
    h = _hypergraph([0, 1], [2, 3], [{0, 2}, {1, 3}])
    assert check_haxell_condition(h)


def test_haxell_caps():
    h = _hypergraph(range(13), [100], [])
    with pytest.raises(MatchingError):
        check_haxell_condition(h)


def test_haxell_condition_implies_matching():
    rng = np.random.default_rng(11)
    for _ in range(500):
        h = _random_instance(rng, max_a=5, max_b=10, max_edges=14)
        if check_haxell_condition(h):
            result = find_saturating_matching(h)
            assert result.status == "found"
            assert verify_matching(h, result.matching, h.side_a)


def test_matcher_agrees_with_oracle_on_small_instances():
    rng = np.random.default_rng(5)
    for _ in range(300):
        h = _random_instance(rng, max_a=4, max_b=8, max_edges=10)
        found = find_saturating_matching(h).status == "found"
        assert found == _oracle(h)
