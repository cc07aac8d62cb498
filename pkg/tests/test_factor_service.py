import pytest

from src.models.factor import FactorCertificate
from src.models.graph import Graph
from src.services.factor_service import (
    FactorError,
    IndivisibleTargetError,
    cycles_through,
    enumerate_canonical_copies,
    enumerate_t_cycles,
    find_ct_factor,
    verify_factor,
)
from src.services.gadget_service import build_switcher, gadget_factor
from src.services.graph_service import complete_blowup, make_partitioned
from tests.helpers import complete_graph, cycle_graph


# ENUMERATION

@pytest.mark.parametrize("g, t, expected", [
    (complete_graph(4), 3, 4),
    (complete_graph(4), 4, 3),
    (complete_graph(5), 5, 12),
    (cycle_graph(5), 5, 1),
    (cycle_graph(6), 3, 0),
])
def test_enumerate_t_cycles_counts(g, t, expected):
    cycles = enumerate_t_cycles(g, t)
    assert len(cycles) == expected
    assert len({frozenset(c) if t == 3 else c for c in cycles}) == expected


def test_enumerated_cycles_are_cycles():
    g = complete_graph(6)
    for cyc in enumerate_t_cycles(g, 4):
        assert all(g.has_edge(cyc[i], cyc[(i + 1) % 4]) for i in range(4))


def test_enumerate_t_cycles_rejects_short_length():
    with pytest.raises(FactorError):
        enumerate_t_cycles(complete_graph(4), 2)


def test_cycles_through_vertex():
    assert cycles_through(complete_graph(4), 0, 3) == [(0, 1, 2), (0, 1, 3), (0, 2, 3)]
    assert len(cycles_through(complete_graph(5), 0, 3, limit=2)) == 2
    assert cycles_through(complete_graph(4), 0, 3, within={1, 2}) == [(0, 1, 2)]


def test_canonical_copies_in_complete_blowup():
    assert enumerate_canonical_copies(complete_blowup(3, 2)) == 8


def test_canonical_copies_with_edgeless_pair():
    pg = complete_blowup(3, 2)
    # keep only V_1-V_2 and V_2-V_3
    edges = [(u, v) for u, v in pg.graph.edge_list() if not (pg.part_of(u) == 0 and pg.part_of(v) == 2)]
    cut = make_partitioned(Graph(6, edges), pg.parts)
    assert enumerate_canonical_copies(cut) == 0


def test_canonical_copies_single_vertex_parts():
    pg = make_partitioned(complete_graph(3), [[0], [1], [2]])
    assert enumerate_canonical_copies(pg) == 1


# SEARCH

def test_k6_has_triangle_factor():
    g = complete_graph(6)
    result = find_ct_factor(g, 3)
    assert result.found
    assert len(result.certificate.cycles) == 2
    assert verify_factor(g, result.certificate, 3, range(6))


def test_c6_has_no_triangle_factor():
    result = find_ct_factor(cycle_graph(6), 3)
    assert result.status == "none"
    assert result.certificate is None


def test_indivisible_target_is_an_error():
    with pytest.raises(IndivisibleTargetError):
        find_ct_factor(complete_graph(5), 3)


def test_ill_posed_searches_are_not_indivisibility():
    for call in (
        lambda: find_ct_factor(complete_graph(4), 2),
        lambda: find_ct_factor(complete_graph(8), 4, canonical_parts=complete_blowup(3, 2)),
    ):
        with pytest.raises(FactorError) as exc:
            call()
        assert not isinstance(exc.value, IndivisibleTargetError)


def test_budget_covers_cycle_enumeration():
    # K_30 has millions of 6-cycles; the budget runs out before they are all listed
    result = find_ct_factor(complete_graph(30), 6, budget_ms=50)
    assert result.status == "unknown"
    assert result.certificate is None


def test_empty_target_is_found():
    assert find_ct_factor(complete_graph(4), 3, restrict_to=[]).found


def test_restricted_search():
    g = complete_graph(7)
    result = find_ct_factor(g, 3, restrict_to=[0, 1, 2, 4, 5, 6])
    assert result.found
    assert 3 not in result.certificate.vertex_set()


def test_invalid_hints_are_ignored():
    result = find_ct_factor(cycle_graph(6), 3, hints=[(0, 1, 2)])
    assert result.status == "none"


def test_canonical_search_uses_canonical_copies_only():
    pg = complete_blowup(3, 3)
    result = find_ct_factor(pg.graph, 3, canonical_parts=pg)
    assert result.found
    for cyc in result.certificate.cycles:
        assert sorted(pg.part_of(v) for v in cyc) == [0, 1, 2]


def test_switcher_minus_v_has_triangle_factor():
    sw = build_switcher(3, 2)
    v = sw.vertex("v")
    result = gadget_factor(sw, (v,))
    assert result.found
    assert len(result.certificate.cycles) == 15
    assert verify_factor(sw.graph, result.certificate, 3, set(range(sw.graph.n)) - {v})


# VERIFICATION

def test_verify_c4_as_its_own_cycle():
    cert = FactorCertificate(t=4, cycles=((0, 1, 2, 3),))
    assert verify_factor(cycle_graph(4), cert, 4, range(4))


def test_verify_rejects_overlap_and_non_edges():
    g = complete_graph(6)
    overlapping = FactorCertificate(t=3, cycles=((0, 1, 2), (2, 3, 4)))
    assert not verify_factor(g, overlapping, 3, range(6))
    not_a_cycle = FactorCertificate(t=3, cycles=((0, 1, 2), (3, 4, 5)))
    assert not verify_factor(cycle_graph(6), not_a_cycle, 3, range(6))
    partial = FactorCertificate(t=3, cycles=((0, 1, 2),))
    assert not verify_factor(g, partial, 3, range(6))


def test_k9_certificate_round_trip():
    g = complete_graph(9)
    result = find_ct_factor(g, 3)
    assert verify_factor(g, result.certificate, 3, range(9))
