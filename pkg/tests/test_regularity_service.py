import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from src.models.regularity import RegularityParams
from src.services.graph_service import complete_blowup, make_partitioned, remove_closed_edge_set
from src.services.regularity_service import (
    RegularityError,
    check_gexp_membership,
    check_lower_regular_exact,
    check_regular_exact,
    check_regular_sampled,
    check_super_regular,
    check_typicality,
    expansion_profile,
    find_regularity_violation,
    slice_params,
    typical_fraction,
    typicality_census,
)
from tests.helpers import bipartite_pair


def _params(eps, p=1, alpha=1) -> RegularityParams:
    return RegularityParams(epsilon=Fraction(eps), p=Fraction(p), alpha=Fraction(alpha))


def _complete_pair(nx, ny):
    return bipartite_pair(nx, ny, [(i, j) for i in range(nx) for j in range(ny)])


def _planted_hole(size=8, hole=4):
    """Complete pair with an empty hole x hole block in the corner."""
    edges = [(i, j) for i in range(size) for j in range(size) if not (i < hole and j < hole)]
    return bipartite_pair(size, size, edges)


def _brute_force_regular(g, X, Y, params) -> bool:
    adj = g.adjacency
    d = Fraction(sum(len(adj[x] & set(Y)) for x in X), len(X) * len(Y))
    sx = max(1, math.ceil(params.epsilon * len(X)))
    sy = max(1, math.ceil(params.epsilon * len(Y)))
    for a in range(sx, len(X) + 1):
        for xs in combinations(X, a):
            for b in range(sy, len(Y) + 1):
                for ys in combinations(Y, b):
                    e = sum(len(adj[x] & set(ys)) for x in xs)
                    if abs(Fraction(e, a * b) - d) > params.tolerance:
                        return False
    return True


# EXACT CHECKS

def test_complete_and_edgeless_pairs_are_regular():
    g, X, Y = _complete_pair(4, 4)
    assert check_regular_exact(g, X, Y, _params("1/2"))
    g, X, Y = bipartite_pair(4, 4, [])
    assert check_regular_exact(g, X, Y, _params("1/2"))


def test_perfect_matching_is_not_regular_for_small_epsilon():
    g, X, Y = bipartite_pair(4, 4, [(i, i) for i in range(4)])
    assert not check_regular_exact(g, X, Y, _params("1/5"))


def test_planted_hole_is_a_violation():
    g, X, Y = _planted_hole()
    witness = find_regularity_violation(g, X, Y, _params("1/2"))
    assert witness is not None
    xs, ys = witness
    assert len(xs) >= 4 and len(ys) >= 4
    assert not check_lower_regular_exact(g, X, Y, _params("1/2"))


def test_large_epsilon_accepts_everything():
    # ε ≥ d/p leaves no room below d - εp and none above d + εp
    g, X, Y = _planted_hole()
    assert check_regular_exact(g, X, Y, _params("3/4"))


def test_lower_regular_ignores_dense_subsets():
    g, X, Y = bipartite_pair(2, 2, [(0, 0)])
    params = _params("1/2")
    assert not check_regular_exact(g, X, Y, params)
    assert check_lower_regular_exact(g, X, Y, params)


def test_exact_check_errors():
    g, X, Y = bipartite_pair(3, 3, [])
    with pytest.raises(RegularityError):
        check_regular_exact(g, X, [], _params("1/2"))
    with pytest.raises(RegularityError):
        check_regular_exact(g, X, X, _params("1/2"))
    g, X, Y = bipartite_pair(15, 2, [])
    with pytest.raises(RegularityError):
        check_regular_exact(g, X, Y, _params("1/2"))


def test_exact_check_matches_brute_force():
    rng = np.random.default_rng(17)
    for _ in range(60):
        nx, ny = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        edges = [(i, j) for i in range(nx) for j in range(ny) if rng.random() < 0.5]
        g, X, Y = bipartite_pair(nx, ny, edges)
        params = _params(Fraction(int(rng.integers(1, 4)), 4), p=Fraction(1, 2))
        assert check_regular_exact(g, X, Y, params) == _brute_force_regular(g, X, Y, params)


def test_super_regular_complete_pair():
    g, X, Y = _complete_pair(5, 5)
    assert check_super_regular(g, X, Y, _params("1/2"))
    g, X, Y = _planted_hole()
    assert not check_super_regular(g, X, Y, _params("1/2"))


# SAMPLED CHECK

def test_sampled_check_on_complete_pair():
    g, X, Y = _complete_pair(20, 20)
    verdict = check_regular_sampled(g, X, Y, _params("1/2"), trials=50, seed=1)
    assert verdict.status == "no_violation_found"
    assert verdict.trials == 50
    assert verdict.pair_density == 1


def test_sampled_check_needs_a_trial():
    g, X, Y = _complete_pair(3, 3)
    with pytest.raises(RegularityError):
        check_regular_sampled(g, X, Y, _params("1/2"), trials=0)


def test_sampled_check_finds_matching_violation():
    g, X, Y = bipartite_pair(14, 14, [(i, i) for i in range(14)])
    params = _params("1/10")
    verdict = check_regular_sampled(g, X, Y, params, trials=10_000, seed=0)
    assert verdict.status == "violation"
    assert abs(verdict.witness_density - verdict.pair_density) > params.tolerance


def test_sampled_violation_is_confirmed_exactly():
    rng = np.random.default_rng(23)
    params = _params("1/3", p="1/2")
    for seed in range(200):
        edges = [(i, j) for i in range(6) for j in range(6) if rng.random() < 0.5]
        g, X, Y = bipartite_pair(6, 6, edges)
        verdict = check_regular_sampled(g, X, Y, params, trials=20, seed=seed)
        if verdict.status == "violation":
            assert not check_regular_exact(g, X, Y, params)


def test_sampled_check_is_reproducible():
    g, X, Y = bipartite_pair(14, 14, [(i, i) for i in range(14)])
    a = check_regular_sampled(g, X, Y, _params("1/10"), trials=500, seed=9)
    b = check_regular_sampled(g, X, Y, _params("1/10"), trials=500, seed=9)
    assert a == b


# SLICING

def test_slice_params():
    sliced = slice_params(_params("1/25"), Fraction(2, 5))
    assert sliced.epsilon == Fraction(1, 10)
    assert sliced.density_slack == Fraction(1, 25)


def test_slice_params_bounds():
    with pytest.raises(RegularityError):
        slice_params(_params("1/10"), Fraction(1, 10))
    with pytest.raises(RegularityError):
        slice_params(_params("1/10"), Fraction(3, 5))


# EXPANSION

def test_expansion_on_complete_c4_blowup(blowup_c4):
    report = expansion_profile(blowup_c4, 0, k=1, gamma=Fraction(0), params=_params("1/2"))
    assert report.passed
    assert [lvl.size for lvl in report.forward] == [5]
    assert [lvl.size for lvl in report.backward] == [5]


def test_isolated_vertex_does_not_expand(blowup_c4):
    g = remove_closed_edge_set(blowup_c4.graph, [0])
    pg = make_partitioned(g, blowup_c4.parts)
    report = expansion_profile(pg, 0, k=1, gamma=Fraction(1, 2), params=_params("1/2"))
    assert not report.passed
    assert not report.passed_direction("forward")


def test_expansion_errors(blowup_c4):
    with pytest.raises(RegularityError):
        expansion_profile(blowup_c4, 0, k=0, gamma=Fraction(0), params=_params("1/2"))
    pg = make_partitioned(blowup_c4.graph, [sorted(p) for p in blowup_c4.parts[:3]],
                          exceptional=blowup_c4.parts[3])
    with pytest.raises(RegularityError):
        expansion_profile(pg, 19, k=1, gamma=Fraction(0), params=_params("1/2"))


# MEMBERSHIP AND TYPICALITY

@pytest.mark.parametrize("eps", ["1/2", "1/10", "1/100"])
def test_complete_blowups_are_members(eps):
    for t, k, n_tilde in ((3, 2, 6), (4, 2, 5)):
        report = check_gexp_membership(complete_blowup(t, n_tilde), t, k, _params(eps))
        assert report.member
        assert report.sampled_pairs == 0


def test_deleting_a_star_fails_only_its_centre(blowup_c3):
    g = remove_closed_edge_set(blowup_c3.graph, [0])
    pg = make_partitioned(g, blowup_c3.parts)
    report = check_gexp_membership(pg, 3, 2, _params("1/2"))
    assert not report.member
    assert report.pair_failures == []
    assert report.failing_vertices() == {0}
    assert report.vertex_failures["degree"] == [0]
    assert not check_typicality(pg, 0, 3, 2, _params("1/2"))
    assert check_typicality(pg, 6, 3, 2, _params("1/2"))


def test_membership_rejects_bad_shapes(blowup_c3):
    with pytest.raises(RegularityError):
        check_gexp_membership(blowup_c3, 3, 3, _params("1/2"))
    with pytest.raises(RegularityError):
        check_gexp_membership(blowup_c3, 4, 2, _params("1/2"))


def test_census_on_complete_blowup(blowup_c3):
    rows = typicality_census(blowup_c3, 3, 2, _params("1/10"))
    assert len(rows) == 18 * 3
    assert {row.clause for row in rows} == {"expanding_forward", "expanding_backward", "lower_regular"}
    assert typical_fraction(rows) == 1


def test_typical_fraction_of_nothing():
    assert typical_fraction([]) == 0
