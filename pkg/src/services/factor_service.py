"""
Factor Service - C_t-factor search and verification, t-cycle and canonical copy enumeration.
"""
import logging
import time
from collections import defaultdict
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from src.models.factor import FactorCertificate, FactorSearchResult
from src.models.graph import Graph, PartitionedGraph
from src.services.exact_cover import POLL_EVERY, ExactCover, deadline_after

logger = logging.getLogger(__name__)


class FactorError(Exception):
    """Raised when a factor search is asked an ill-posed question."""
    pass


class IndivisibleTargetError(FactorError):
    """Raised when the target size is not a multiple of t, so no factor exists."""
    pass


# CYCLE ENUMERATION

def _paths_from(adj: Sequence[frozenset[int]], s: int, length: int, allowed,
                deadline: float | None = None) -> list[tuple[int, ...]]:
    """
    Simple paths with `length` edges from s over allowed vertices greater than s.
    Stops early, with a partial list, once `deadline` has passed.
    """
    out = []
    stack = [(s,)]
    pops = 0
    while stack:
        pops += 1
        if deadline is not None and pops % POLL_EVERY == 0 and time.monotonic() > deadline:
            break
        path = stack.pop()
        if len(path) == length + 1:
            out.append(path)
            continue
        for w in adj[path[-1]]:
            if w > s and w in allowed and w not in path:
                stack.append(path + (w,))
    return out


def iter_t_cycles(g: Graph, t: int, within: Iterable[int] | None = None,
                  deadline: float | None = None) -> Iterator[tuple[int, ...]]:
    """
    Yield every t-cycle of g[within] once, grouped by smallest vertex.

    Each cycle starts at its smallest vertex s; its two neighbours of s are
    ordered so the second entry is smaller than the last. Halves of length
    ⌈t/2⌉ and ⌊t/2⌋ are joined at a shared far endpoint.

    The generator returns early once `deadline` (a time.monotonic() value)
    has passed, so callers must check the clock before trusting completeness.

    Raises:
        FactorError: If t < 3
    """
    if t < 3:
        raise FactorError(f"cycle length must be at least 3, got {t}")
    allowed = frozenset(range(g.n)) if within is None else frozenset(within)
    adj = g.adjacency
    a, b = (t + 1) // 2, t // 2
    joins = 0
    for s in sorted(allowed):
        if deadline is not None and time.monotonic() > deadline:
            return
        long_half = _paths_from(adj, s, a, allowed, deadline)
        if not long_half:
            continue
        by_end: dict[int, list[tuple[int, ...]]] = defaultdict(list)
        for path in (long_half if a == b else _paths_from(adj, s, b, allowed, deadline)):
            by_end[path[-1]].append(path)
        for pa in long_half:
            inner_a = set(pa[1:-1])
            for pb in by_end.get(pa[-1], ()):
                joins += 1
                if deadline is not None and joins % POLL_EVERY == 0 and time.monotonic() > deadline:
                    return
                if pa[1] >= pb[1]:
                    continue
                if inner_a.intersection(pb[1:-1]):
                    continue
                yield pa + tuple(reversed(pb[1:-1]))


def enumerate_t_cycles(g: Graph, t: int, within: Iterable[int] | None = None) -> list[tuple[int, ...]]:
    """
    Every t-cycle of g[within], each exactly once.

    Returns:
        Sorted list of cycle tuples
    """
    return sorted(iter_t_cycles(g, t, within))


def cycles_through(g: Graph, v: int, t: int, within: Iterable[int] | None = None,
                   limit: int | None = None) -> list[tuple[int, ...]]:
    """
    t-cycles containing v, each once, starting at v.

    Args:
        limit: Stop after this many cycles
    """
    allowed = frozenset(range(g.n)) if within is None else frozenset(within) | {v}
    adj = g.adjacency
    out = []
    stack = [(v,)]
    while stack:
        path = stack.pop()
        if len(path) == t:
            if v in adj[path[-1]] and path[1] < path[-1]:
                out.append(path)
                if limit is not None and len(out) >= limit:
                    break
            continue
        for w in adj[path[-1]]:
            if w != v and w in allowed and w not in path:
                stack.append(path + (w,))
    return sorted(out)


def iter_canonical_copies(pg: PartitionedGraph, part_indices: Sequence[int],
                          within: Iterable[int] | None = None) -> Iterator[tuple[int, ...]]:
    """
    Yield canonical copies of C_ℓ on the listed parts (ℓ = len(part_indices)):
    one vertex per listed part, consecutive listed parts adjacent, last adjacent to first.
    """
    adj = pg.graph.adjacency
    parts = [pg.part(i) for i in part_indices]
    if within is not None:
        keep = frozenset(within)
        parts = [p & keep for p in parts]
    ell = len(parts)
    if ell < 3 or any(not p for p in parts):
        return

    for v0 in sorted(parts[0]):
        stack = [(v0,)]
        while stack:
            path = stack.pop()
            if len(path) == ell:
                if v0 in adj[path[-1]]:
                    yield path
                continue
            nxt = adj[path[-1]] & parts[len(path)]
            for w in sorted(nxt, reverse=True):
                stack.append(path + (w,))


def enumerate_canonical_copies(pg: PartitionedGraph, part_indices: Sequence[int] | None = None,
                               within: Iterable[int] | None = None) -> int:
    """Exact count of canonical copies of C_ℓ on the listed parts (all parts by default)."""
    if part_indices is None:
        part_indices = range(pg.t)
    return sum(1 for _ in iter_canonical_copies(pg, list(part_indices), within))


# FACTOR SEARCH

def find_ct_factor(
    g: Graph,
    t: int,
    restrict_to: Iterable[int] | None = None,
    canonical_parts: PartitionedGraph | None = None,
    budget_ms: int | None = None,
    hints: Iterable[Sequence[int]] = (),
) -> FactorSearchResult:
    """
    Exact search for a C_t-factor of g[restrict_to].

    Args:
        g: Host graph
        t: Cycle length
        restrict_to: Vertex set to cover (all of g by default)
        canonical_parts: When given, only canonical copies along its t parts are used
        budget_ms: Time budget; exhaustion gives status "unknown"
        hints: Candidate cycles tried first (re-checked, never trusted)

    Returns:
        FactorSearchResult; "none" only after a complete search

    Raises:
        FactorError: If t < 3 or the canonical parts do not match t
        IndivisibleTargetError: If the target size is not divisible by t
    """
    if t < 3:
        raise FactorError(f"cycle length must be at least 3, got {t}")
    if canonical_parts is not None and canonical_parts.t != t:
        raise FactorError(f"canonical parts give C_{canonical_parts.t} copies, not C_{t}")
    target = frozenset(range(g.n)) if restrict_to is None else frozenset(int(v) for v in restrict_to)
    if len(target) % t:
        raise IndivisibleTargetError(f"target has {len(target)} vertices, not divisible by t={t}")
    if not target:
        return FactorSearchResult(status="found", certificate=FactorCertificate(t=t))
    deadline = deadline_after(budget_ms)

    # 1. Cheap refutations: degree and component divisibility
    if not _components_divisible(g, target, t):
        logger.debug("factor refuted by component sizes")
        return FactorSearchResult(status="none")

    # 2. Candidate rows, hints first, one per vertex set
    rows: list[tuple[int, ...]] = []
    seen: set[frozenset[int]] = set()
    for cyc in hints:
        cyc = tuple(int(v) for v in cyc)
        key = frozenset(cyc)
        if key <= target and key not in seen and _is_cycle(g, cyc, t) and _is_canonical(canonical_parts, cyc):
            seen.add(key)
            rows.append(cyc)
    if canonical_parts is not None:
        candidates: Iterable[tuple[int, ...]] = iter_canonical_copies(canonical_parts, range(t), target)
    else:
        candidates = iter_t_cycles(g, t, target, deadline)
    for i, cyc in enumerate(candidates, 1):
        if deadline is not None and i % POLL_EVERY == 0 and time.monotonic() > deadline:
            break
        key = frozenset(cyc)
        if key not in seen:
            seen.add(key)
            rows.append(cyc)
    if deadline is not None and time.monotonic() > deadline:
        logger.info("C_%d-factor search on %d vertices: budget spent enumerating candidates (%d so far)",
                    t, len(target), len(rows))
        return FactorSearchResult(status="unknown", candidate_cycles=len(rows))

    # 3. Exact cover over target vertices
    outcome = ExactCover(rows, primary=target).solve(deadline)
    logger.info("C_%d-factor search on %d vertices: %s (%d candidates, %d steps)",
                t, len(target), outcome.status, len(rows), outcome.steps)
    if outcome.status != "found":
        return FactorSearchResult(status=outcome.status, candidate_cycles=len(rows), steps=outcome.steps)

    cycles = tuple(sorted((rows[i] for i in outcome.rows), key=lambda c: (min(c), c)))
    return FactorSearchResult(
        status="found",
        certificate=FactorCertificate(t=t, cycles=cycles),
        candidate_cycles=len(rows),
        steps=outcome.steps,
    )


def _components_divisible(g: Graph, target: frozenset[int], t: int) -> bool:
    idx = np.fromiter(sorted(target), dtype=np.int64)
    sub = g.to_sparse()[idx][:, idx]
    if np.any(np.asarray(sub.sum(axis=1)).ravel() < 2):
        return False
    _, labels = connected_components(sub, directed=False)
    return bool(np.all(np.bincount(labels) % t == 0))


def _is_cycle(g: Graph, cyc: Sequence[int], t: int) -> bool:
    if len(cyc) != t or len(set(cyc)) != t:
        return False
    return all(g.has_edge(cyc[i], cyc[(i + 1) % t]) for i in range(t))


def _is_canonical(pg: PartitionedGraph | None, cyc: Sequence[int]) -> bool:
    if pg is None:
        return True
    start = pg.part_of(cyc[0])
    if start < 0:
        return False
    forward = all(pg.part_of(v) == (start + i) % pg.t for i, v in enumerate(cyc))
    backward = all(pg.part_of(v) == (start - i) % pg.t for i, v in enumerate(cyc))
    return forward or backward


def verify_factor(g: Graph, cert: FactorCertificate, t: int, required_cover: Iterable[int]) -> bool:
    """
    True iff every tuple is a t-cycle of g, tuples are disjoint, and they cover
    required_cover exactly.
    """
    used: set[int] = set()
    for cyc in cert.cycles:
        if any(not 0 <= v < g.n for v in cyc) or not _is_cycle(g, cyc, t):
            return False
        if used.intersection(cyc):
            return False
        used.update(cyc)
    return used == set(required_cover)
