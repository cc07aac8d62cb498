"""
Random Service - seeded G(n, p) sampling, adversarial attacks and empirical
probes of random-graph edge and expansion bounds.

Every random draw uses a generator keyed by the master seed plus a
structural key (row, pair or trial index), so results never depend on
evaluation order.
"""
import logging
import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from src.config.settings import MAX_AUX_EDGES_PER_VERTEX
from src.models.factor import FactorCertificate, Hypergraph
from src.models.graph import Graph, PartitionedGraph
from src.models.random_lab import (
    AttackReport,
    CycleCoverReport,
    GnpSample,
    ProbeReport,
    ProbeRow,
    RobustExpansionRow,
)
from src.models.regularity import RegularityParams
from src.services.factor_service import IndivisibleTargetError, cycles_through, find_ct_factor
from src.services.graph_service import (
    bfs_layer,
    count_edges_between,
    make_partitioned,
    remove_closed_edge_set,
    remove_edges_within,
    second_neighborhood,
)
from src.services.matching_service import find_saturating_matching
from src.services.regularity_service import expansion_profile

logger = logging.getLogger(__name__)


class RandomLabError(Exception):
    """Raised when a sampling or probe request is out of range."""
    pass


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng([int(k) for k in key])


def _check_probability(p: Fraction, name: str = "p") -> Fraction:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise RandomLabError(f"{name} must lie in [0, 1], got {p}")
    return p


def _check_seed(seed: int) -> int:
    if seed < 0 or seed >= 2**64:
        raise RandomLabError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


# DENSITY EXPRESSIONS

_POWER = re.compile(r"^(?:(?P<c>[0-9.]+(?:/[0-9]+)?)\s*\*\s*)?n\s*\^\s*\(?\s*-\s*(?P<a>[0-9.]+)(?:\s*/\s*(?P<b>[0-9]+))?\s*\)?$")
_LOG = re.compile(r"^(?:(?P<c>[0-9.]+(?:/[0-9]+)?)\s*\*\s*)?ln\s*\(\s*n\s*\)\s*/\s*n$")


def parse_density(expr: str, n: int) -> Fraction:
    """
    Evaluate a density expression at n.

    Accepts "1/2", "0.01", "C*n^-a/b", "n^-0.6" and "C*ln(n)/n".
    Irrational values are rounded to a rational with denominator ≤ 10^12.

    Raises:
        RandomLabError: On unparsable input or a value outside [0, 1]
    """
    text = expr.strip().replace(" ", "")
    try:
        return _check_probability(Fraction(text))
    except (ValueError, ZeroDivisionError):
        pass

    if n < 1:
        raise RandomLabError(f"n must be positive to evaluate {expr!r}")
    if m := _POWER.match(text):
        c = float(Fraction(m["c"])) if m["c"] else 1.0
        exponent = float(Fraction(m["a"])) / (int(m["b"]) if m["b"] else 1)
        value = c * n ** (-exponent)
    elif m := _LOG.match(text):
        c = float(Fraction(m["c"])) if m["c"] else 1.0
        value = c * math.log(n) / n
    else:
        raise RandomLabError(f"cannot parse density expression {expr!r}")
    return _check_probability(Fraction(value).limit_denominator(10**12))


# SAMPLING

def _row_successors(seed: int, u: int, n: int, q: float) -> np.ndarray:
    """Neighbours v > u of u in G(n, q), drawn by geometric skipping."""
    remaining = n - u - 1
    if remaining <= 0 or q <= 0:
        return np.zeros(0, dtype=np.int64)
    if q >= 1:
        return np.arange(u + 1, n, dtype=np.int64)
    rng = _rng(seed, u)
    expected = remaining * q
    chunk = int(expected + 4 * math.sqrt(expected) + 16)
    found = []
    pos = u
    while True:
        hits = pos + np.cumsum(rng.geometric(q, size=chunk))
        found.append(hits[hits < n])
        if hits[-1] >= n:
            break
        pos = int(hits[-1])
    return np.concatenate(found).astype(np.int64)


def sample_gnp(n: int, p: Fraction | str, seed: int) -> GnpSample:
    """
    Sample G(n, p) with every pair present independently.

    Row u (its pairs with larger ids) is drawn from a generator keyed by
    (seed, u), so the edge set depends only on (n, p, seed).

    Raises:
        RandomLabError: If p is outside [0, 1] or the seed is negative
    """
    p = parse_density(p, n) if isinstance(p, str) else _check_probability(p)
    seed = _check_seed(seed)
    q = float(p)
    rows = []
    for u in range(n):
        succ = _row_successors(seed, u, n, q)
        if succ.size:
            rows.append(np.column_stack([np.full(succ.size, u, dtype=np.int64), succ]))
    edges = np.concatenate(rows) if rows else np.zeros((0, 2), dtype=np.int64)
    g = Graph(n, edges)
    logger.info("sampled G(%d, %s) with seed %d: %d edges", n, p, seed, g.num_edges)
    return GnpSample(graph=g, n=n, p=p, seed=seed)


def sample_blowup_subgraph(t: int, n_tilde: int, p: Fraction, alpha: Fraction, seed: int) -> PartitionedGraph:
    """
    Random subgraph of the complete C_t blow-up: each edge between V_i and
    V_{i+1} is kept with probability αp, nothing else exists.

    Part i holds ids i*ñ .. (i+1)*ñ - 1; the pair (V_i, V_{i+1}) row x is keyed by (seed, i, x).

    Raises:
        RandomLabError: If αp is outside [0, 1] or t < 3
    """
    if t < 3:
        raise RandomLabError(f"t must be at least 3, got {t}")
    if n_tilde < 1:
        raise RandomLabError(f"n_tilde must be positive, got {n_tilde}")
    q = float(_check_probability(Fraction(alpha) * Fraction(p), "alpha*p"))
    seed = _check_seed(seed)
    chunks = []
    for i in range(t):
        j = (i + 1) % t
        for x in range(n_tilde):
            keep = np.flatnonzero(_rng(seed, i, x).random(n_tilde) < q)
            if keep.size:
                chunks.append(np.column_stack([np.full(keep.size, i * n_tilde + x), j * n_tilde + keep]))
    edges = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    parts = [range(i * n_tilde, (i + 1) * n_tilde) for i in range(t)]
    return make_partitioned(Graph(t * n_tilde, edges), parts)


# ATTACKS

def deleted_degree_fractions(before: Graph, after: Graph) -> dict[int, Fraction]:
    """deleted-degree(v)/deg_before(v) for every vertex of positive degree."""
    old, new = before.degrees(), after.degrees()
    return {
        int(v): Fraction(int(old[v] - new[v]), int(old[v]))
        for v in np.flatnonzero(old)
    }


def _extremes(fractions: dict[int, Fraction]) -> tuple[Fraction, Fraction]:
    if not fractions:
        return Fraction(0), Fraction(0)
    values = fractions.values()
    return max(values), min(values)


def lies_on_cycle(g: Graph, v: int, length: int) -> bool:
    """Complete search for a cycle of the given length through v."""
    return bool(cycles_through(g, v, length, limit=1))


def attack_second_neighborhood(g: Graph, v: int | None = None) -> tuple[Graph, AttackReport]:
    """
    Delete every edge with both endpoints in N²(v), then check whether v
    still lies on a 5-cycle.

    Args:
        g: Source graph
        v: Attacked vertex; defaults to the maximum-degree vertex (lowest id on ties)

    Raises:
        RandomLabError: If g is empty or v is out of range
    """
    if g.n == 0:
        raise RandomLabError("cannot attack an empty graph")
    if v is None:
        v = int(np.argmax(g.degrees()))
    if not 0 <= v < g.n:
        raise RandomLabError(f"vertex {v} out of range for {g.n} vertices")

    attacked = remove_edges_within(g, second_neighborhood(g, v))
    high, low = _extremes(deleted_degree_fractions(g, attacked))
    on_c5 = lies_on_cycle(attacked, v, 5)
    report = AttackReport(
        attack="second_neighborhood",
        target=[v],
        deleted_edges=g.num_edges - attacked.num_edges,
        max_deleted_degree_fraction=high,
        min_deleted_degree_fraction=low,
        post_property="on_C5",
        post_value=on_c5,
    )
    logger.info("second-neighbourhood attack on %d removed %d edges; on C_5 afterwards: %s",
                v, report.deleted_edges, on_c5)
    return attacked, report


def attack_half_cut(g: Graph, t: int, seed: int | None = None,
                    budget_ms: int | None = None) -> tuple[Graph, AttackReport]:
    """
    Disconnect a set S of n/2 - 1 vertices from the rest and search for a
    C_t-factor afterwards.

    S is the lowest n/2 - 1 ids, or a seeded random choice when `seed` is given.

    Raises:
        RandomLabError: If n is odd
        FactorError: If t < 3
    """
    if g.n % 2:
        raise RandomLabError(f"half cut needs an even number of vertices, got {g.n}")
    size = max(g.n // 2 - 1, 0)
    if seed is None:
        S = np.arange(size)
    else:
        S = np.sort(_rng(_check_seed(seed)).choice(g.n, size=size, replace=False))
    side = g.mask(S)
    e = g.edges
    attacked = Graph(g.n, e[side[e[:, 0]] == side[e[:, 1]]])
    high, low = _extremes(deleted_degree_fractions(g, attacked))

    try:
        search = find_ct_factor(attacked, t, budget_ms=budget_ms)
        status = search.status
    except IndivisibleTargetError:
        status = "none"
    report = AttackReport(
        attack="half_cut",
        target=[int(x) for x in S],
        deleted_edges=g.num_edges - attacked.num_edges,
        max_deleted_degree_fraction=high,
        min_deleted_degree_fraction=low,
        post_property=f"has_C{t}_factor",
        post_value=status == "found",
        post_status=status,
    )
    logger.info("half-cut attack removed %d edges; C_%d-factor afterwards: %s", report.deleted_edges, t, status)
    return attacked, report


# EMPIRICAL PROBES

def check_edge_bound(g: Graph, X: Iterable[int], Y: Iterable[int], p: Fraction, c: float) -> ProbeRow:
    """e(X, Y) ≤ |X||Y|p + c·sqrt(|X||Y|np) for a single pair, as trial 0."""
    X, Y = list(X), list(Y)
    xy = len(X) * len(Y)
    bound = xy * float(p) + c * math.sqrt(xy * g.n * float(p))
    e = count_edges_between(g, X, Y)
    return ProbeRow(trial=0, quantity=e, threshold=bound, passed=e <= bound)


def empirical_edge_bound(sample: GnpSample, trials: int, c: float, seed: int) -> ProbeReport:
    """
    Check the edge-distribution bound on random disjoint pairs (X, Y).

    Sizes are uniform in 1..n/2; trial i draws from a generator keyed (seed, i).

    Raises:
        RandomLabError: If p > 0.99 or trials < 1
    """
    if sample.p > Fraction(99, 100):
        raise RandomLabError(f"edge bound is stated for p ≤ 0.99, got {sample.p}")
    if trials < 1:
        raise RandomLabError(f"trials must be at least 1, got {trials}")
    g, n = sample.graph, sample.n
    report = ProbeReport(probe="edge_bound", regime="random_disjoint_pairs",
                         parameters={"c": str(c), "p": str(sample.p), "n": str(n), "seed": str(seed)})
    half = max(n // 2, 1)
    for trial in range(trials):
        rng = _rng(seed, trial)
        if n < 2:
            X, Y = [], []
        else:
            sx, sy = (int(s) for s in rng.integers(1, half + 1, size=2))
            perm = rng.permutation(n)
            X, Y = perm[:sx].tolist(), perm[sx:sx + sy].tolist()
        row = check_edge_bound(g, X, Y, sample.p, c)
        report.rows.append(row.model_copy(update={"trial": trial}))
    logger.info("edge bound probe: %d/%d violations", report.violations, trials)
    return report


def empirical_k_expansion(sample: GnpSample, k: int, nu: Fraction, trials: int, seed: int,
                          allow_singletons: bool = True) -> ProbeReport:
    """
    Check |N^k(X)| ≥ (1 - kν)|X|(np)^k on random sets X.

    |X| is ⌊ν/(n^(k-1) p^k)⌋ when that is at least 1; otherwise X is a
    singleton and the regime is labelled "singleton".

    Raises:
        RandomLabError: If the size regime is empty and singletons are disabled
    """
    if k < 1 or trials < 1:
        raise RandomLabError(f"k and trials must be positive, got k={k}, trials={trials}")
    g, n, p = sample.graph, sample.n, float(sample.p)
    nu = Fraction(nu)
    if p == 0 or n == 0:
        limit = 0.0
    else:
        limit = float(nu) / (n ** (k - 1) * p ** k)
    if limit >= 1:
        size, regime = min(int(limit), n), "bounded"
    elif allow_singletons:
        size, regime = 1, "singleton"
    else:
        raise RandomLabError(f"set-size bound {limit:.3g} is below 1 and singleton fallback is disabled")

    report = ProbeReport(probe="k_expansion", regime=regime,
                         parameters={"k": str(k), "nu": str(nu), "set_size": str(size), "seed": str(seed)})
    factor = (1 - k * float(nu)) * (n * p) ** k
    for trial in range(trials):
        X = _rng(seed, trial).choice(n, size=size, replace=False)
        reach = len(bfs_layer(g, X.tolist(), k))
        threshold = factor * size
        report.rows.append(ProbeRow(trial=trial, quantity=reach, threshold=threshold, passed=reach >= threshold))
    logger.info("k-expansion probe (%s regime, |X|=%d): pass rate %.3f", regime, size, report.pass_rate)
    return report


def count_non_expanding(pg: PartitionedGraph, U: Iterable[int], Q: Iterable[int], k: int,
                        gamma: Fraction, params: RegularityParams) -> list[int]:
    """
    Vertices of U that are (γ,k)-expanding forward in G but not in G - ∇(Q).
    """
    after = make_partitioned(remove_closed_edge_set(pg.graph, Q), pg.parts, pg.exceptional)
    lost = []
    for v in sorted(U):
        before_ok = expansion_profile(pg, v, k, gamma, params, directions=("forward",)).passed
        if before_ok and not expansion_profile(after, v, k, gamma, params, directions=("forward",)).passed:
            lost.append(v)
    return lost


def robust_expansion_experiment(
    pg: PartitionedGraph,
    k: int,
    gamma: Fraction,
    q_schedule: Sequence[int],
    seed: int,
    params: RegularityParams,
    U: Iterable[int] | None = None,
    K: float = 1.0,
) -> list[RobustExpansionRow]:
    """
    For each |Q| in the schedule delete ∇(Q) for a random Q ⊆ V \\ U and
    count vertices of U losing forward (γ,k)-expansion.

    Args:
        U: Vertices examined; defaults to part 0, so expansion runs along V_1..V_k
        K: Scale of the K/p ceiling reported next to each count
    """
    U = sorted(pg.part(0) if U is None else set(U))
    outside = np.array(sorted(set(range(pg.graph.n)) - set(U)), dtype=np.int64)
    ceiling = K / float(params.p)
    rows = []
    for idx, size in enumerate(q_schedule):
        if not 0 <= size <= outside.size:
            raise RandomLabError(f"Q size {size} outside [0, {outside.size}]")
        Q = _rng(seed, idx).choice(outside, size=size, replace=False) if size else outside[:0]
        lost = count_non_expanding(pg, U, Q.tolist(), k, gamma, params)
        rows.append(RobustExpansionRow(q_size=size, newly_non_expanding=len(lost), ceiling=ceiling, vertices=lost))
        logger.info("robust expansion |Q|=%d: %d newly non-expanding (ceiling %.1f)", size, len(lost), ceiling)
    return rows


# MINIMUM-DEGREE COVERING

def min_degree_cycle_cover(
    g: Graph,
    X: Iterable[int],
    U: Iterable[int],
    t: int,
    alpha: Fraction,
    budget_ms: int | None = None,
    p: Fraction | None = None,
) -> CycleCoverReport:
    """
    Disjoint t-cycles in g[X ∪ U] covering X, via a saturating matching in
    the hypergraph of vertex sets {x} ∪ Y spanning a t-cycle.

    The degree hypotheses are measured and reported, not assumed. p defaults
    to the edge density of g.

    Raises:
        RandomLabError: If X and U intersect or t < 3
    """
    X, U = frozenset(int(x) for x in X), frozenset(int(u) for u in U)
    if X & U:
        raise RandomLabError("X and U must be disjoint")
    if t < 3:
        raise RandomLabError(f"t must be at least 3, got {t}")
    alpha = Fraction(alpha)
    if p is None:
        pairs = g.n * (g.n - 1) // 2
        p = Fraction(g.num_edges, pairs) if pairs else Fraction(0)
    p = Fraction(p)

    # 1. Degree hypotheses
    adj = g.adjacency
    scale = len(U) * p
    if scale > 0:
        ratio = min((Fraction(len(adj[v] & U)) / scale for v in X | U), default=Fraction(0))
    else:
        ratio = Fraction(0)
    exceptions = sum(1 for u in U if len(adj[u] & U) < (Fraction(1, 2) + alpha) * scale)

    # 2. Auxiliary hypergraph
    edges: dict[frozenset[int], tuple[int, ...]] = {}
    truncated = False
    for x in sorted(X):
        found = cycles_through(g, x, t, within=U, limit=MAX_AUX_EDGES_PER_VERTEX)
        truncated = truncated or len(found) >= MAX_AUX_EDGES_PER_VERTEX
        for cyc in found:
            edges.setdefault(frozenset(cyc), cyc)
    keys = list(edges)
    h = Hypergraph(vertices=X | U, edges=tuple(keys), side_a=X)

    # 3. Saturating matching
    result = find_saturating_matching(h, budget_ms=budget_ms)
    status = result.status
    certificate = None
    if status == "found":
        cycles = tuple(sorted((edges[keys[i]] for i in result.matching.edges), key=lambda c: (min(c), c)))
        certificate = FactorCertificate(t=t, cycles=cycles)
    elif status == "none" and truncated:
        status = "unknown"
    logger.info("min-degree cover of %d vertices by C_%d: %s (%d auxiliary edges)", len(X), t, status, len(keys))
    return CycleCoverReport(
        status=status,
        certificate=certificate,
        min_degree_ratio=ratio,
        high_degree_exceptions=exceptions,
        hypotheses_hold=ratio >= alpha,
        auxiliary_edges=len(keys),
        truncated=truncated,
    )
