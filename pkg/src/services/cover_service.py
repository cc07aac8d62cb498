"""
Cover Service - bulk canonical packing and leftover matching into W.
"""
import logging
import time
from typing import Iterable, Sequence

import numpy as np

from src.config.settings import MAX_AUX_EDGES_PER_VERTEX
from src.models.factor import FactorCertificate, Hypergraph
from src.models.graph import PartitionedGraph
from src.models.pipeline import BulkCover, LeftoverMatch, PipelineConfig
from src.services.exact_cover import deadline_after
from src.services.factor_service import FactorError, find_ct_factor, iter_canonical_copies
from src.services.matching_service import find_saturating_matching

logger = logging.getLogger(__name__)


class CoverError(Exception):
    """Raised when bulk covering or leftover matching is asked an ill-posed question."""
    pass


def _sorted_cycles(cycles: Iterable[tuple[int, ...]]) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(cycles, key=lambda c: (min(c), c)))


def _rotation(t: int, i: int) -> list[int]:
    return [(i + j) % t for j in range(t)]


# BULK

def _greedy_pass(pg: PartitionedGraph, region: list[set[int]], target: int,
                 rng: np.random.Generator, deadline: float | None) -> tuple[list[tuple[int, ...]], list[set[int]]]:
    """
    One greedy packing pass: repeatedly take the most constrained live
    vertex and a canonical cycle through it inside the uncovered region.
    """
    t = pg.t
    adj = pg.graph.adjacency
    remaining = [set(block) for block in region]
    dead: set[int] = set()
    cycles: list[tuple[int, ...]] = []
    tiebreak = {v: float(x) for v, x in zip(sorted(set().union(*region)), rng.random(sum(map(len, region))))}

    while len(remaining[0]) > target:
        if deadline is not None and time.monotonic() > deadline:
            break
        live = [(i, v) for i in range(t) for v in remaining[i] if v not in dead]
        if not live:
            break

        def pressure(item: tuple[int, int]) -> tuple[int, float]:
            i, v = item
            return (len(adj[v] & remaining[(i + 1) % t]) + len(adj[v] & remaining[(i - 1) % t]), tiebreak[v])

        i, v = min(live, key=pressure)
        within = set().union(*(remaining[j] for j in range(t) if j != i)) | {v}
        cycle = next(iter_canonical_copies(pg, _rotation(t, i), within), None)
        if cycle is None:
            dead.add(v)
            continue
        cycles.append(cycle)
        for j, x in enumerate(cycle):
            remaining[(i + j) % t].discard(x)
    return cycles, remaining


def cover_bulk(pg: PartitionedGraph, avoid: Iterable[int], rho, cfg: PipelineConfig,
               max_leftover: int | None = None) -> BulkCover:
    """
    Pack canonical C_t copies into the parts minus `avoid`.

    With a zero leftover target the cover is an exact canonical C_t-factor
    search; otherwise greedy packing with seeded restarts until at most
    the target is left uncovered in every part. Leftover sizes are equal
    across parts because every canonical cycle takes one vertex per part.

    Args:
        pg: Host blow-up
        avoid: Vertices reserved for the absorber
        rho: Leftover fraction; the target is ⌊ρñ⌋
        cfg: Pipeline configuration (seed, budget, restarts)
        max_leftover: Further cap on the target (⌊m/(t-1)⌋ in the pipeline)

    Raises:
        CoverError: If the parts minus `avoid` are empty or unequal
    """
    t = pg.t
    avoid = frozenset(int(v) for v in avoid)
    region = [set(pg.part(i)) - avoid for i in range(t)]
    sizes = {len(block) for block in region}
    if len(sizes) != 1:
        raise CoverError(f"parts minus avoid have unequal sizes {sorted(sizes)}")
    size = sizes.pop()
    if size == 0:
        raise CoverError("nothing left to cover outside the avoided set")

    target = int(rho * pg.n_tilde)
    if max_leftover is not None:
        target = min(target, max_leftover)

    if target == 0:
        try:
            result = find_ct_factor(pg.graph, t, restrict_to=set().union(*region),
                                    canonical_parts=pg, budget_ms=cfg.bulk_budget_ms)
        except FactorError as e:
            raise CoverError(str(e)) from e
        if result.found:
            return BulkCover(certificate=result.certificate, leftover=tuple(frozenset() for _ in range(t)),
                             target=0, reached_target=True)
        logger.info("exact bulk cover: %s", result.status)
        return BulkCover(certificate=FactorCertificate(t=t), leftover=tuple(frozenset(b) for b in region),
                         target=0, reached_target=False)

    deadline = deadline_after(cfg.bulk_budget_ms)
    best: tuple[list[tuple[int, ...]], list[set[int]]] | None = None
    restarts = 0
    for attempt in range(cfg.bulk_restarts + 1):
        rng = np.random.default_rng([cfg.seed, attempt])
        cycles, remaining = _greedy_pass(pg, region, target, rng, deadline)
        if best is None or len(remaining[0]) < len(best[1][0]):
            best = (cycles, remaining)
        restarts = attempt
        if len(remaining[0]) <= target:
            break
        if deadline is not None and time.monotonic() > deadline:
            break

    cycles, remaining = best
    reached = len(remaining[0]) <= target
    logger.info("greedy bulk cover: %d cycles, %d left per part (target %d), %d restarts",
                len(cycles), len(remaining[0]), target, restarts)
    return BulkCover(
        certificate=FactorCertificate(t=t, cycles=_sorted_cycles(cycles)),
        leftover=tuple(frozenset(b) for b in remaining),
        target=target,
        reached_target=reached,
        restarts=restarts,
    )


# LEFTOVER

def match_leftover(pg: PartitionedGraph, Z_parts: Sequence[Iterable[int]], W_parts: Sequence[Iterable[int]],
                   cfg: PipelineConfig) -> LeftoverMatch:
    """
    Cover every leftover vertex v ∈ Z_i by a canonical cycle whose other
    vertices lie in W_j, j ≠ i, via a Z-saturating matching.

    Each part of W ends up contributing (t-1)|Z_i| vertices.

    Raises:
        CoverError: If the Z_i are unequal, or no saturating matching is found
    """
    t = pg.t
    Z = [frozenset(int(v) for v in block) for block in Z_parts]
    W = [frozenset(int(v) for v in block) for block in W_parts]
    if len(Z) != t or len(W) != t:
        raise CoverError(f"need {t} Z and W sets, got {len(Z)} and {len(W)}")
    if len({len(block) for block in Z}) != 1:
        raise CoverError(f"leftover sets are unequal: {[len(block) for block in Z]}")
    if not any(Z):
        return LeftoverMatch(certificate=FactorCertificate(t=t), used_w=tuple(frozenset() for _ in range(t)))

    all_z, all_w = frozenset().union(*Z), frozenset().union(*W)
    if all_z & all_w:
        raise CoverError("leftover vertices overlap W")

    cycle_of: dict[frozenset[int], tuple[int, ...]] = {}
    for i in range(t):
        for v in sorted(Z[i]):
            within = (all_w - W[i]) | {v}
            for count, cyc in enumerate(iter_canonical_copies(pg, _rotation(t, i), within)):
                if count >= MAX_AUX_EDGES_PER_VERTEX:
                    break
                cycle_of.setdefault(frozenset(cyc), cyc)

    keys = list(cycle_of)
    h = Hypergraph(vertices=all_z | all_w, edges=tuple(keys), side_a=all_z)
    result = find_saturating_matching(h, budget_ms=cfg.leftover_budget_ms)
    if result.status != "found":
        raise CoverError(f"no leftover matching ({result.status}) over {len(keys)} candidate cycles")

    cycles = _sorted_cycles(cycle_of[keys[e]] for e in result.matching.edges)
    used = set().union(*(set(c) for c in cycles)) & all_w
    used_w = tuple(frozenset(used & W_i) for W_i in W)
    logger.info("leftover matching: %d cycles, W usage per part %s", len(cycles), [len(u) for u in used_w])
    return LeftoverMatch(certificate=FactorCertificate(t=t, cycles=cycles), used_w=used_w)
