"""
Regularity Service - regular and lower-regular pairs, expansion, typicality
and G_exp^k membership.

Subsets in every check have size at least ⌈ε|V|⌉. Densities deviate by at
most ε·α·p (RegularityParams.tolerance).
"""
import logging
import math
from fractions import Fraction
from typing import Iterable, Literal

import numpy as np

from src.config.settings import REGULARITY_EXACT_CAP, SAMPLED_REGULARITY_TRIALS
from src.models.graph import Graph, PartitionedGraph
from src.models.regularity import (
    CensusRow,
    ExpansionLevel,
    ExpansionReport,
    MembershipReport,
    RegularityParams,
    RegularityVerdict,
)
from src.services.graph_service import count_edges_between, neighborhood

logger = logging.getLogger(__name__)


class RegularityError(Exception):
    """Raised when a regularity question is malformed or over the exact cap."""
    pass


def _subset_size(eps: Fraction, size: int) -> int:
    return max(1, math.ceil(eps * size))


def _pair_arrays(g: Graph, X: Iterable[int], Y: Iterable[int]) -> tuple[list[int], list[int]]:
    xs, ys = sorted(set(X)), sorted(set(Y))
    if not xs or not ys:
        raise RegularityError("regularity of a pair with an empty side is undefined")
    if set(xs) & set(ys):
        raise RegularityError("pair sides must be disjoint")
    return xs, ys


# EXACT CHECKS

def find_regularity_violation(
    g: Graph,
    X: Iterable[int],
    Y: Iterable[int],
    params: RegularityParams,
    lower: bool = False,
) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """
    Exhaustive search for subsets X', Y' of size ≥ ⌈ε|·|⌉ whose density
    deviates from d(X, Y) by more than ε·α·p (only downwards when `lower`).

    For each X' the extreme densities over |Y'| = s come from the s
    smallest or largest degrees into X', so only X' is enumerated.

    Returns:
        (X', Y') of the first violation, or None

    Raises:
        RegularityError: On empty or overlapping sides, or a side above the exact cap
    """
    xs, ys = _pair_arrays(g, X, Y)
    if len(xs) > REGULARITY_EXACT_CAP or len(ys) > REGULARITY_EXACT_CAP:
        raise RegularityError(
            f"exact regularity check capped at {REGULARITY_EXACT_CAP} per side, got {len(xs)}x{len(ys)}"
        )
    nx_, ny = len(xs), len(ys)
    sx, sy = _subset_size(params.epsilon, nx_), _subset_size(params.epsilon, ny)
    total = count_edges_between(g, xs, ys)
    tol = params.tolerance
    P, Q = tol.numerator, tol.denominator

    adj = g.adjacency
    A = np.array([[y in adj[x] for y in ys] for x in xs], dtype=np.int64)

    masks = np.arange(1, 1 << nx_, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(nx_)) & 1).astype(np.int64)
    sizes = bits.sum(axis=1)
    keep = sizes >= sx
    masks, bits, sizes = masks[keep], bits[keep], sizes[keep]

    D = bits @ A
    asc = np.sort(D, axis=1)
    lo_pref = np.cumsum(asc, axis=1)
    hi_pref = np.cumsum(asc[:, ::-1], axis=1)

    dtype = object if P + Q > 10**12 else np.int64
    pair_slots = nx_ * ny
    for s in range(sy, ny + 1):
        slots = (sizes * s).astype(dtype)
        lo = lo_pref[:, s - 1].astype(dtype)
        hi = hi_pref[:, s - 1].astype(dtype)
        # d(X',Y') < d - tol  <=>  Q(e'*nxny - E*slots) < -P*slots*nxny
        below = Q * (lo * pair_slots - total * slots) < -P * slots * pair_slots
        above = np.zeros_like(below, dtype=bool) if lower else (
            Q * (hi * pair_slots - total * slots) > P * slots * pair_slots
        )
        hits = np.flatnonzero(np.asarray(below | above, dtype=bool))
        if hits.size:
            r = int(hits[0])
            xsub = tuple(xs[i] for i in range(nx_) if bits[r, i])
            order = np.argsort(D[r], kind="stable")
            pick = order[:s] if below[r] else order[::-1][:s]
            ysub = tuple(sorted(ys[i] for i in pick))
            return xsub, ysub
    return None


def check_regular_exact(g: Graph, X: Iterable[int], Y: Iterable[int], params: RegularityParams) -> bool:
    """True iff (X, Y) is (ε, αp)-regular, checked exhaustively."""
    return find_regularity_violation(g, X, Y, params) is None


def check_lower_regular_exact(g: Graph, X: Iterable[int], Y: Iterable[int], params: RegularityParams) -> bool:
    """True iff (X, Y) is (ε, αp)-lower-regular, checked exhaustively."""
    return find_regularity_violation(g, X, Y, params, lower=True) is None


# SAMPLED CHECK

def check_regular_sampled(
    g: Graph,
    X: Iterable[int],
    Y: Iterable[int],
    params: RegularityParams,
    trials: int = SAMPLED_REGULARITY_TRIALS,
    seed: int = 0,
    lower: bool = False,
) -> RegularityVerdict:
    """
    Sample subset pairs of size ⌈ε|X|⌉, ⌈ε|Y|⌉ and report the first violation.

    Only refutes: "no_violation_found" is not a regularity certificate.

    Raises:
        RegularityError: If trials < 1 or the pair is malformed
    """
    if trials < 1:
        raise RegularityError(f"trials must be at least 1, got {trials}")
    xs, ys = _pair_arrays(g, X, Y)
    xs_arr, ys_arr = np.array(xs), np.array(ys)
    sx, sy = _subset_size(params.epsilon, len(xs)), _subset_size(params.epsilon, len(ys))
    d = Fraction(count_edges_between(g, xs, ys), len(xs) * len(ys))
    tol = params.tolerance
    sub = g.to_sparse()[xs_arr][:, ys_arr].tocsr()

    rng = np.random.default_rng(seed)
    for trial in range(1, trials + 1):
        xi = np.sort(rng.choice(len(xs), size=sx, replace=False))
        yi = np.sort(rng.choice(len(ys), size=sy, replace=False))
        e = int(sub[xi][:, yi].sum())
        d_sub = Fraction(e, sx * sy)
        if d_sub < d - tol or (not lower and d_sub > d + tol):
            return RegularityVerdict(
                status="violation",
                trials=trial,
                witness_x=tuple(int(v) for v in xs_arr[xi]),
                witness_y=tuple(int(v) for v in ys_arr[yi]),
                pair_density=d,
                witness_density=d_sub,
            )
    return RegularityVerdict(status="no_violation_found", trials=trials, pair_density=d)


def check_pair(g: Graph, X: Iterable[int], Y: Iterable[int], params: RegularityParams,
               lower: bool = False, trials: int = SAMPLED_REGULARITY_TRIALS, seed: int = 0) -> tuple[bool, bool]:
    """
    Exact check when both sides fit the cap, sampled otherwise.

    Returns:
        (passed, sampled)
    """
    X, Y = list(X), list(Y)
    if len(X) <= REGULARITY_EXACT_CAP and len(Y) <= REGULARITY_EXACT_CAP:
        return find_regularity_violation(g, X, Y, params, lower=lower) is None, False
    verdict = check_regular_sampled(g, X, Y, params, trials=trials, seed=seed, lower=lower)
    return verdict.status == "no_violation_found", True


def check_super_regular(g: Graph, X: Iterable[int], Y: Iterable[int], params: RegularityParams) -> bool:
    """Regular, and every vertex has at least (1-ε)|other side|αp neighbours across."""
    X, Y = frozenset(X), frozenset(Y)
    passed, _ = check_pair(g, X, Y, params)
    if not passed:
        return False
    adj = g.adjacency
    scale = (1 - params.epsilon) * params.scaled_density
    return all(len(adj[x] & Y) >= scale * len(Y) for x in X) and all(len(adj[y] & X) >= scale * len(X) for y in Y)


def slice_params(params: RegularityParams, epsilon2: Fraction) -> RegularityParams:
    """
    Parameters inherited by subsets of relative size ε_2: regularity ε_1/ε_2
    with density window d ± ε_1·p.

    Raises:
        RegularityError: Unless ε_1 < ε_2 ≤ 1/2
    """
    epsilon2 = Fraction(epsilon2)
    if not params.epsilon < epsilon2 <= Fraction(1, 2):
        raise RegularityError(f"slicing needs epsilon < epsilon2 <= 1/2, got {params.epsilon} and {epsilon2}")
    return RegularityParams(
        epsilon=params.epsilon / epsilon2,
        p=params.p,
        alpha=params.alpha,
        density_slack=params.epsilon * params.p,
    )


# EXPANSION

def _layers(g: Graph, v: int, sequence: list[frozenset[int]]) -> list[int]:
    """Sizes of the layered neighbourhoods of v along `sequence`."""
    sizes = []
    layer = np.array([v], dtype=np.int64)
    for block in sequence:
        if layer.size:
            allowed = g.mask(block)
            nbrs = neighborhood(g, layer)
            layer = nbrs[allowed[nbrs]]
        sizes.append(int(layer.size))
    return sizes


def _layer_set(g: Graph, v: int, sequence: list[frozenset[int]]) -> frozenset[int]:
    layer = np.array([v], dtype=np.int64)
    for block in sequence:
        if not layer.size:
            break
        allowed = g.mask(block)
        nbrs = neighborhood(g, layer)
        layer = nbrs[allowed[nbrs]]
    return frozenset(layer.tolist())


def _direction(pg: PartitionedGraph, v: int, steps: int, sign: int) -> list[frozenset[int]]:
    i = pg.part_of(v)
    return [pg.part(i + sign * j) for j in range(1, steps + 1)]


def expansion_profile(
    pg: PartitionedGraph,
    v: int,
    k: int,
    gamma: Fraction,
    params: RegularityParams,
    directions: tuple[Literal["forward", "backward"], ...] = ("forward", "backward"),
) -> ExpansionReport:
    """
    (γ,k)-expansion of v: |N^i| along V_{i+1..i+k} and V_{i-1..i-k} against
    (1-γ)(ñαp)^i.

    Raises:
        RegularityError: If k < 1 or v sits in the exceptional set
    """
    if k < 1:
        raise RegularityError(f"k must be at least 1, got {k}")
    if pg.part_of(v) < 0:
        raise RegularityError(f"vertex {v} is not in any part")
    gamma = Fraction(gamma)
    base = pg.n_tilde * params.scaled_density
    report = ExpansionReport(vertex=v, part=pg.part_of(v), k=k, gamma=gamma)
    for direction in directions:
        sign = 1 if direction == "forward" else -1
        sizes = _layers(pg.graph, v, _direction(pg, v, k, sign))
        levels = []
        for i, size in enumerate(sizes, start=1):
            threshold = (1 - gamma) * base ** i
            levels.append(ExpansionLevel(level=i, size=size, threshold=threshold, passed=size >= threshold))
        setattr(report, direction, levels)
    return report


# CLASS MEMBERSHIP AND TYPICALITY

def _check_tk(pg: PartitionedGraph, t: int, k: int) -> None:
    if t not in (2 * k - 1, 2 * k):
        raise RegularityError(f"t must be 2k-1 or 2k, got t={t}, k={k}")
    if pg.t != t:
        raise RegularityError(f"partition has {pg.t} parts, expected {t}")
    if pg.exceptional:
        raise RegularityError("class membership is defined without an exceptional set")
    pg.n_tilde  # raises on unequal parts


def _lower_regular_pairs(pg: PartitionedGraph, v: int, t: int, k: int) -> list[tuple[frozenset[int], frozenset[int]]]:
    """The pairs whose lower-regularity the typicality clause asks for."""
    g = pg.graph
    i = pg.part_of(v)
    ahead = _layer_set(g, v, _direction(pg, v, k - 1, 1))
    behind = _layer_set(g, v, _direction(pg, v, k - 1, -1))
    if t == 2 * k - 1:
        return [(ahead, behind)]
    return [(ahead, pg.part(i + k)), (behind, pg.part(i - k))]


def _vertex_clauses(pg: PartitionedGraph, v: int, t: int, k: int, params: RegularityParams,
                    seed: int, trials: int) -> dict[str, bool]:
    """Degree, neighbourhood and lower-regular clauses for one vertex."""
    g = pg.graph
    eps = params.epsilon
    base = pg.n_tilde * params.scaled_density
    adj = g.adjacency
    i = pg.part_of(v)

    # 1. Degree window into both neighbouring parts
    lo, hi = (1 - eps) * base, (1 + eps) * base
    degree_ok = all(lo <= len(adj[v] & pg.part(i + s)) <= hi for s in (1, -1))

    # 2. j-th neighbourhoods for j in [k-1]
    neighborhood_ok = True
    for sign in (1, -1):
        sizes = _layers(g, v, _direction(pg, v, k - 1, sign))
        if any(size < (1 - eps) * base ** j for j, size in enumerate(sizes, start=1)):
            neighborhood_ok = False

    # 3. Lower-regular (k-1)-st neighbourhoods
    lower_ok = True
    for A, B in _lower_regular_pairs(pg, v, t, k):
        if not A or not B:
            lower_ok = False
            break
        passed, _ = check_pair(g, A, B, params, lower=True, trials=trials, seed=seed + v)
        if not passed:
            lower_ok = False
            break

    return {"degree": degree_ok, "neighborhood": neighborhood_ok, "lower_regular": lower_ok}


def check_gexp_membership(
    pg: PartitionedGraph,
    t: int,
    k: int,
    params: RegularityParams,
    trials: int = SAMPLED_REGULARITY_TRIALS,
    seed: int = 0,
) -> MembershipReport:
    """
    Check every clause of G_exp^k(C_t, ñ, ε, αp) and aggregate failures per clause.

    Pairs (V_i, V_{i+1}) must be regular with density (1±ε)αp; each vertex
    must satisfy the degree window (1±ε)ñαp, the neighbourhood bounds
    |N^j| ≥ (1-ε)(ñαp)^j for j < k, and the lower-regular clause on its
    (k-1)-st neighbourhoods.

    Raises:
        RegularityError: If t is not 2k-1 or 2k, or the partition is malformed
    """
    _check_tk(pg, t, k)
    g = pg.graph
    report = MembershipReport(t=t, k=k, params=params, vertex_failures={
        "degree": [], "neighborhood": [], "lower_regular": [],
    })

    # 1. Consecutive pairs
    window = ((1 - params.epsilon) * params.scaled_density, (1 + params.epsilon) * params.scaled_density)
    for i in range(t):
        A, B = pg.part(i), pg.part(i + 1)
        d = Fraction(count_edges_between(g, A, B), len(A) * len(B))
        if not window[0] <= d <= window[1]:
            report.pair_failures.append(f"V{i + 1}-V{(i + 1) % t + 1}: density {d} outside (1±ε)αp")
        passed, sampled = check_pair(g, A, B, params, trials=trials, seed=seed + i)
        report.sampled_pairs += int(sampled)
        if not passed:
            report.pair_failures.append(f"V{i + 1}-V{(i + 1) % t + 1}: not regular")

    # 2. Per-vertex clauses
    for i in range(t):
        for v in sorted(pg.part(i)):
            for clause, ok in _vertex_clauses(pg, v, t, k, params, seed, trials).items():
                if not ok:
                    report.vertex_failures[clause].append(v)

    logger.info("G_exp^%d membership on C_%d blow-up: member=%s, failing vertices=%d",
                k, t, report.member, len(report.failing_vertices()))
    return report


def check_typicality(pg: PartitionedGraph, v: int, t: int, k: int, params: RegularityParams,
                     trials: int = SAMPLED_REGULARITY_TRIALS, seed: int = 0) -> bool:
    """
    (ε,k)-typicality of v: (ε,k-1)-expanding in both directions plus the
    lower-regular clause on its (k-1)-st neighbourhoods.
    """
    _check_tk(pg, t, k)
    return all(typicality_clauses(pg, v, t, k, params, trials, seed).values())


def typicality_clauses(pg: PartitionedGraph, v: int, t: int, k: int, params: RegularityParams,
                       trials: int = SAMPLED_REGULARITY_TRIALS, seed: int = 0) -> dict[str, bool]:
    g = pg.graph
    base = pg.n_tilde * params.scaled_density
    clauses = {}
    for name, sign in (("expanding_forward", 1), ("expanding_backward", -1)):
        sizes = _layers(g, v, _direction(pg, v, k - 1, sign))
        clauses[name] = all(size >= (1 - params.epsilon) * base ** j for j, size in enumerate(sizes, start=1))
    lower_ok = True
    for A, B in _lower_regular_pairs(pg, v, t, k):
        if not A or not B:
            lower_ok = False
            break
        passed, _ = check_pair(g, A, B, params, lower=True, trials=trials, seed=seed + v)
        lower_ok = lower_ok and passed
    clauses["lower_regular"] = lower_ok
    return clauses


def typicality_census(pg: PartitionedGraph, t: int, k: int, params: RegularityParams,
                      trials: int = SAMPLED_REGULARITY_TRIALS, seed: int = 0) -> list[CensusRow]:
    """One row per (vertex, clause), vertices in id order."""
    _check_tk(pg, t, k)
    rows = []
    for v in range(pg.graph.n):
        for clause, ok in typicality_clauses(pg, v, t, k, params, trials, seed).items():
            rows.append(CensusRow(vertex=v, clause=clause, passed=ok))
    return rows


def typical_fraction(rows: list[CensusRow]) -> Fraction:
    """Fraction of vertices passing every clause in a census."""
    verdict: dict[int, bool] = {}
    for row in rows:
        verdict[row.vertex] = verdict.get(row.vertex, True) and row.passed
    if not verdict:
        return Fraction(0)
    return Fraction(sum(verdict.values()), len(verdict))
