"""
Matching Service - A-saturating hypergraph matchings and the Haxell condition.
"""
import logging
from itertools import combinations
from typing import Iterable

from src.config.settings import HAXELL_MAX_A, HAXELL_MAX_B
from src.models.factor import Hypergraph, Matching, MatchingResult
from src.services.exact_cover import ExactCover, deadline_after

logger = logging.getLogger(__name__)


class MatchingError(Exception):
    """Raised when a hypergraph does not have the shape a matching query needs."""
    pass


def edge_uniformity(h: Hypergraph, side_a: frozenset[int]) -> int:
    """
    Check every edge meets A in exactly one vertex and B in the same number
    of vertices; return the edge size ℓ.

    Raises:
        MatchingError: On a malformed edge
    """
    ell = None
    for i, e in enumerate(h.edges):
        if len(e & side_a) != 1:
            raise MatchingError(f"edge {i} meets A in {len(e & side_a)} vertices, expected 1")
        if ell is None:
            ell = len(e)
        elif len(e) != ell:
            raise MatchingError(f"edge {i} has size {len(e)}, expected {ell}")
    return ell if ell is not None else 1


def find_saturating_matching(h: Hypergraph, side_a: Iterable[int] | None = None,
                             budget_ms: int | None = None) -> MatchingResult:
    """
    Complete search for disjoint edges covering every A-vertex.

    Args:
        h: Hypergraph whose edges each meet A once
        side_a: A-side (defaults to h.side_a)
        budget_ms: Time budget; exhaustion gives status "unknown"

    Raises:
        MatchingError: If an edge has the wrong shape or A is not inside V(h)
    """
    A = frozenset(h.side_a if side_a is None else side_a)
    if not A <= h.vertices:
        raise MatchingError("side A must be a subset of the vertex set")
    edge_uniformity(h, A)

    cover = ExactCover([sorted(e) for e in h.edges], primary=A, secondary=h.vertices - A)
    outcome = cover.solve(deadline_after(budget_ms))
    logger.debug("saturating matching on |A|=%d, %d edges: %s", len(A), len(h.edges), outcome.status)
    if outcome.status != "found":
        return MatchingResult(status=outcome.status, steps=outcome.steps)
    return MatchingResult(
        status="found",
        matching=Matching(edges=tuple(sorted(outcome.rows)), saturates=A),
        steps=outcome.steps,
    )


def verify_matching(h: Hypergraph, matching: Matching, side_a: Iterable[int]) -> bool:
    """True iff the matching's edges exist, are pairwise disjoint and cover side_a."""
    used: set[int] = set()
    for i in matching.edges:
        if not 0 <= i < len(h.edges):
            return False
        e = h.edges[i]
        if used & e:
            return False
        used |= e
    return frozenset(side_a) <= used


def check_haxell_condition(h: Hypergraph, side_a: Iterable[int] | None = None) -> bool:
    """
    Haxell's condition: for every A' ⊆ A and B' ⊆ B with
    |B'| ≤ (2ℓ−3)(|A'|−1), some edge meets A' and avoids B'.

    Equivalently, for every non-empty A', the B-parts of the edges meeting A'
    have no hitting set of size ≤ (2ℓ−3)(|A'|−1).

    Raises:
        MatchingError: If |A| or |B| exceeds the configured caps, or edges are malformed
    """
    return find_haxell_violation(h, side_a) is None


def find_haxell_violation(h: Hypergraph, side_a: Iterable[int] | None = None) -> tuple[int, ...] | None:
    """First A' (by size, then ids) violating Haxell's condition, or None."""
    A = frozenset(h.side_a if side_a is None else side_a)
    B = h.vertices - A
    if len(A) > HAXELL_MAX_A or len(B) > HAXELL_MAX_B:
        raise MatchingError(
            f"Haxell check capped at |A| ≤ {HAXELL_MAX_A}, |B| ≤ {HAXELL_MAX_B}; got {len(A)}, {len(B)}"
        )
    ell = edge_uniformity(h, A)

    bit = {b: 1 << i for i, b in enumerate(sorted(B))}
    parts_by_a: dict[int, list[int]] = {a: [] for a in A}
    for e in h.edges:
        (a,) = e & A
        mask = 0
        for b in e - A:
            mask |= bit[b]
        parts_by_a[a].append(mask)

    order = sorted(A)
    for size in range(1, len(order) + 1):
        bound = (2 * ell - 3) * (size - 1)
        for sub in combinations(order, size):
            masks = {m for a in sub for m in parts_by_a[a]}
            if 0 in masks:
                # an edge with no B-part cannot be avoided by any B'
                continue
            if _has_hitting_set(sorted(masks), bound):
                return sub
    return None


def _has_hitting_set(masks: list[int], k: int) -> bool:
    """Is there a set of at most k bits meeting every mask?"""
    if not masks:
        return True
    if k <= 0:
        return False
    union = 0
    for m in masks:
        union |= m
    if bin(union).count("1") <= k:
        return True

    # greedy disjoint packing is a lower bound on the hitting number
    packed, taken = 0, 0
    for m in sorted(masks, key=lambda x: bin(x).count("1")):
        if not m & taken:
            taken |= m
            packed += 1
    if packed > k:
        return False

    pivot = min(masks, key=lambda x: (bin(x).count("1"), x))
    rest = pivot
    while rest:
        low = rest & -rest
        rest ^= low
        if _has_hitting_set([m for m in masks if not m & low], k - 1):
            return True
    return False
