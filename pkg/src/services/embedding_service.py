"""
Embedding Service - root planning, rooted absorber embedding, W-absorbers
and absorption.

Absorbers are placed by exact rooted backtracking that honours the blow-up
labelling of F_abs: a gadget vertex with label ℓ goes to host part π(ℓ),
where π is the rotation or reflection of C_t sending the root labels to the
root parts.
"""
import logging
import time
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from src.models.factor import FactorCertificate
from src.models.graph import PartitionedGraph
from src.models.pipeline import EmbeddedAbsorber, PipelineConfig, RootPlan, Template, WAbsorber
from src.models.regularity import RegularityParams
from src.services.exact_cover import POLL_EVERY, deadline_after
from src.services.factor_service import verify_factor
from src.services.gadget_service import blowup_labeling, build_absorber, gadget_factor
from src.services.regularity_service import check_gexp_membership
from src.services.template_service import TemplateError, perfect_matching

logger = logging.getLogger(__name__)


class EmbeddingError(Exception):
    """Raised when absorbers cannot be planned or embedded."""
    pass


class AbsorptionError(Exception):
    """Raised when a W-absorber is asked to absorb an unbalanced or foreign set."""
    pass


class Blueprint(NamedTuple):
    """F_abs with everything the embedder needs, computed once per (t, k)."""
    t: int
    k: int
    n: int
    adjacency: tuple[frozenset[int], ...]
    labels: tuple[int, ...]
    roots: tuple[int, ...]
    order: tuple[int, ...]
    back: tuple[tuple[int, ...], ...]
    full_factor: tuple[tuple[int, ...], ...]
    rootless_factor: tuple[tuple[int, ...], ...]


@lru_cache(maxsize=8)
def absorber_blueprint(t: int, k: int) -> Blueprint:
    """
    Build F_abs, its labelling, a BFS order from the roots and both of its
    C_t-factors.

    Raises:
        EmbeddingError: If either factor of F_abs is not found
    """
    absorber = build_absorber(t, k)
    labels = blowup_labeling(absorber)
    roots = absorber.roots()
    adj = absorber.graph.adjacency

    full = gadget_factor(absorber)
    rootless = gadget_factor(absorber, roots)
    if not (full.found and rootless.found):
        raise EmbeddingError(f"F_abs for t={t}, k={k} lacks a factor: {full.status}, {rootless.status}")

    # BFS from the roots; each vertex records its neighbours placed before it
    position = {r: i for i, r in enumerate(roots)}
    order: list[int] = []
    queue = list(roots)
    head = 0
    while head < len(queue):
        x = queue[head]
        head += 1
        for y in sorted(adj[x]):
            if y not in position:
                position[y] = len(position)
                order.append(y)
                queue.append(y)
    if len(position) != absorber.graph.n:
        raise EmbeddingError("F_abs is not connected to its roots")
    back = tuple(tuple(sorted(y for y in adj[x] if position[y] < position[x])) for x in order)

    return Blueprint(
        t=t,
        k=k,
        n=absorber.graph.n,
        adjacency=adj,
        labels=tuple(labels[v] for v in range(absorber.graph.n)),
        roots=roots,
        order=tuple(order),
        back=back,
        full_factor=full.certificate.cycles,
        rootless_factor=rootless.certificate.cycles,
    )


# ROOT PLANNING

def plan_roots(tpl: Template, W: Sequence[Iterable[int]], X: Sequence[Iterable[int]], seed: int) -> RootPlan:
    """
    Seeded bijection f: B_i → W_i ∪ X_i with f(B_i') = W_i, and the root
    tuple R_e = (f(b_0), ..., f(b_{t-1})) of every template edge.

    Raises:
        EmbeddingError: If there are not t parts, a set does not have m
            vertices, or W_i and X_i overlap
    """
    if len(W) != tpl.t or len(X) != tpl.t:
        raise EmbeddingError(f"need {tpl.t} W and X sets, got {len(W)} and {len(X)}")
    root_map: dict[int, int] = {}
    for i in range(tpl.t):
        W_i, X_i = sorted(set(W[i])), sorted(set(X[i]))
        if len(W_i) != tpl.m or len(X_i) != tpl.m:
            raise EmbeddingError(f"part {i}: |W_i|={len(W_i)}, |X_i|={len(X_i)}, expected m={tpl.m}")
        if set(W_i) & set(X_i):
            raise EmbeddingError(f"part {i}: W_i and X_i overlap")
        rng = np.random.default_rng([seed, i])
        flexible = tpl.flexible(i)
        fixed = [b for b in tpl.part(i) if not tpl.is_flexible(b)]
        for b, host in zip(flexible, rng.permutation(W_i)):
            root_map[b] = int(host)
        for b, host in zip(fixed, rng.permutation(X_i)):
            root_map[b] = int(host)
    root_tuples = tuple(tuple(root_map[b] for b in e) for e in tpl.edges)
    return RootPlan(root_map=root_map, root_tuples=root_tuples)


# ROOTED EMBEDDING

def _part_map(bp: Blueprint, root_parts: Sequence[int]) -> dict[int, int]:
    """Rotation or reflection π of C_t with π(label(r_i)) = root_parts[i]."""
    t = bp.t
    root_labels = [bp.labels[r] for r in bp.roots]
    for sign in (1, -1):
        shift = (root_parts[0] - sign * root_labels[0]) % t
        if all((sign * lab + shift) % t == part for lab, part in zip(root_labels, root_parts)):
            return {lab: (sign * lab + shift) % t for lab in range(t)}
    raise EmbeddingError(f"root parts {tuple(root_parts)} are not a cyclic arrangement of the absorber roots")


def _embed_one(pg: PartitionedGraph, bp: Blueprint, roots: Sequence[int], blocked: set[int],
               rng: np.random.Generator, deadline: float | None) -> list[int] | None:
    """
    Backtracking search for an injective, label-respecting embedding of
    F_abs with r_i ↦ roots[i] that avoids `blocked`.

    Returns:
        Gadget vertex -> host vertex, or None when the search fails or times out
    """
    adj = pg.graph.adjacency
    pi = _part_map(bp, [pg.part_of(r) for r in roots])
    free = [set(pg.part(pi[lab])) - blocked for lab in range(bp.t)]

    mapping = [-1] * bp.n
    for r, host in zip(bp.roots, roots):
        mapping[r] = host
    used = set(roots)

    stack: list[list[int]] = []
    pos, steps = 0, 0
    while pos < len(bp.order):
        steps += 1
        if deadline is not None and steps % POLL_EVERY == 0 and time.monotonic() > deadline:
            return None
        x = bp.order[pos]
        if pos == len(stack):
            images = sorted((mapping[y] for y in bp.back[pos]), key=lambda h: len(adj[h]))
            cands = set(free[bp.labels[x]])
            for h in images:
                cands &= adj[h]
            cands -= used
            stack.append([int(c) for c in rng.permutation(sorted(cands))] if cands else [])
        options = stack[pos]
        while options and options[-1] in used:
            options.pop()
        if options:
            c = options.pop()
            mapping[x] = c
            used.add(c)
            pos += 1
            continue
        stack.pop()
        pos -= 1
        if pos < 0:
            return None
        used.discard(mapping[bp.order[pos]])
        mapping[bp.order[pos]] = -1
    return mapping


def _check_root_tuples(pg: PartitionedGraph, roots: Sequence[Sequence[int]], t: int,
                       shared_roots: bool) -> list[tuple[int, ...]]:
    """Validate root tuples; returns them as tuples."""
    slot_of: dict[int, int] = {}
    out = []
    for idx, R in enumerate(roots):
        R = tuple(int(r) for r in R)
        parts = [pg.part_of(r) for r in R]
        if len(R) != t or min(parts) < 0 or len(set(parts)) != t:
            raise EmbeddingError(f"root tuple {idx} {R} does not have one root in each of the {t} parts")
        for slot, r in enumerate(R):
            if r in slot_of and (not shared_roots or slot_of[r] != slot):
                raise EmbeddingError(f"root {r} is shared between root tuples")
            slot_of[r] = slot
        out.append(R)
    return out


def embed_absorbers(
    pg: PartitionedGraph,
    roots: Sequence[Sequence[int]],
    cfg: PipelineConfig,
    reserved: Iterable[int] = (),
    shared_roots: bool = False,
) -> list[EmbeddedAbsorber]:
    """
    Embed one F_abs per root tuple, pairwise disjoint outside their roots.

    Edges are embedded in rounds; edges that failed in one round go first in
    the next, with fresh random candidate orders.

    Args:
        pg: Host blow-up
        roots: Root tuples R_e, one root per part
        cfg: Pipeline configuration (t, k, seeds, budgets, membership knobs)
        reserved: Host vertices no absorber may use outside its own roots
        shared_roots: Allow a root to appear in several tuples, always in the same slot

    Raises:
        EmbeddingError: On malformed roots, failed membership without force,
            or when some absorber cannot be placed
    """
    t = cfg.t
    if pg.t != t:
        raise EmbeddingError(f"host has {pg.t} parts, configuration says t={t}")
    tuples = _check_root_tuples(pg, roots, t, shared_roots)

    if cfg.check_membership:
        params = RegularityParams(epsilon=cfg.epsilon, p=cfg.p, alpha=cfg.alpha)
        report = check_gexp_membership(pg, t, cfg.k, params, seed=cfg.seed)
        logger.info("G_exp^%d membership before embedding: %s", cfg.k, report.member)
        if not report.member and not cfg.force_embedding:
            raise EmbeddingError(f"host fails G_exp^{cfg.k} membership ({len(report.failing_vertices())} failing vertices)")

    bp = absorber_blueprint(t, cfg.k)
    all_roots = {r for R in tuples for r in R}
    base_blocked = set(reserved) | all_roots

    order = list(range(len(tuples)))
    placed: dict[int, list[int]] = {}
    for rnd in range(cfg.embed_rounds):
        placed = {}
        blocked = set(base_blocked)
        failures = []
        for e in order:
            rng = np.random.default_rng([cfg.seed, rnd, e])
            mapping = _embed_one(pg, bp, tuples[e], blocked - set(tuples[e]), rng,
                                 deadline_after(cfg.embed_budget_ms))
            if mapping is None:
                failures.append(e)
                continue
            placed[e] = mapping
            blocked.update(mapping)
        logger.info("embedding round %d: %d of %d absorbers placed", rnd, len(placed), len(tuples))
        if not failures:
            break
        order = failures + [e for e in order if e not in failures]
    else:
        raise EmbeddingError(
            f"placed {len(placed)} of {len(tuples)} absorbers after {cfg.embed_rounds} rounds"
        )

    out = []
    for e in range(len(tuples)):
        mapping = placed[e]
        full = FactorCertificate(t=t, cycles=bp.full_factor).relabel(mapping)
        rootless = FactorCertificate(t=t, cycles=bp.rootless_factor).relabel(mapping)
        images = set(mapping)
        if not (verify_factor(pg.graph, full, t, images)
                and verify_factor(pg.graph, rootless, t, images - set(tuples[e]))):
            raise EmbeddingError(f"embedded absorber {e} does not carry its factors")
        out.append(EmbeddedAbsorber(
            edge=e, roots=tuples[e], mapping=tuple(mapping), full_factor=full, rootless_factor=rootless,
        ))
    return out


# W-ABSORBERS

def build_w_absorber(pg: PartitionedGraph, tpl: Template, W: Sequence[Iterable[int]],
                     X: Sequence[Iterable[int]], cfg: PipelineConfig, plan: RootPlan | None = None) -> WAbsorber:
    """
    Plan roots from the template (unless a plan is given) and embed one
    absorber per template edge.

    Raises:
        EmbeddingError: If planning or embedding fails, or V(A) is unbalanced across parts
    """
    W = tuple(frozenset(int(w) for w in W_i) for W_i in W)
    X = tuple(frozenset(int(x) for x in X_i) for X_i in X)
    if plan is None:
        plan = plan_roots(tpl, W, X, cfg.seed)
    reserved = set().union(*W, *X)
    absorbers = embed_absorbers(pg, plan.root_tuples, cfg, reserved=reserved, shared_roots=True)
    wabs = WAbsorber(host=pg.graph, t=tpl.t, template=tpl, plan=plan, W=W, X=X, absorbers=tuple(absorbers))

    sizes = {len(wabs.vertex_set & pg.part(i)) for i in range(pg.t)}
    if len(sizes) != 1:
        raise EmbeddingError(f"absorber meets the parts unevenly: {sorted(sizes)}")
    logger.info("W-absorber: %d absorbers, %d vertices", len(absorbers), len(wabs.vertex_set))
    return wabs


def absorb(wabs: WAbsorber, Z: Iterable[int]) -> FactorCertificate:
    """
    C_t-factor of A - Z for a balanced Z ⊆ ∪W_i.

    A perfect matching M of B - f^{-1}(Z) picks, for each edge in M, the
    factor of its absorber that covers the roots, and the rootless factor
    for every other edge.

    Raises:
        AbsorptionError: If Z is not inside ∪W_i, is unbalanced, or the
            template has no matching for it
    """
    Z = frozenset(int(z) for z in Z)
    all_w = frozenset().union(*wabs.W)
    if not Z <= all_w:
        raise AbsorptionError(f"{len(Z - all_w)} vertices of Z lie outside W")
    counts = [len(Z & W_i) for W_i in wabs.W]
    if len(set(counts)) != 1:
        raise AbsorptionError(f"Z is unbalanced across W: {counts}")

    inverse = {host: b for b, host in wabs.plan.root_map.items()}
    try:
        matching = perfect_matching(wabs.template, frozenset(inverse[z] for z in Z))
    except TemplateError as e:
        raise AbsorptionError(str(e)) from e
    if matching is None:
        raise AbsorptionError("template has no perfect matching after deleting Z; template is corrupt")

    chosen = set(matching)
    cycles: list[tuple[int, ...]] = []
    for a in wabs.absorbers:
        cycles.extend((a.full_factor if a.edge in chosen else a.rootless_factor).cycles)
    cert = FactorCertificate(t=wabs.t, cycles=tuple(sorted(cycles, key=lambda c: (min(c), c))))
    if not verify_factor(wabs.host, cert, wabs.t, wabs.vertex_set - Z):
        raise AbsorptionError("assembled absorber factor failed verification")
    logger.debug("absorbed |Z|=%d using %d root-covering absorbers", len(Z), len(chosen))
    return cert
