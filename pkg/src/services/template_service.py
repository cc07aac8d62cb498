"""
Template Service - robust t-partite t-uniform template hypergraphs.

A template is valid when for every balanced Z ⊆ ∪B_i' (equal numbers of
flexible vertices from every part) the hypergraph B - Z has a perfect
matching.
"""
import logging
from math import comb
from itertools import combinations, product
from typing import Iterator, Sequence

import numpy as np

from src.config.settings import TEMPLATE_VERIFY_CAP, template_degree_cap
from src.models.pipeline import Template
from src.services.exact_cover import ExactCover, deadline_after

logger = logging.getLogger(__name__)

# Spot-checked balanced Z per template when m is above the verify cap
SPOT_CHECKS = 64


class TemplateError(Exception):
    """Raised when a template cannot be built or verified."""
    pass


def balanced_subsets(tpl: Template) -> Iterator[frozenset[int]]:
    """Every balanced Z ⊆ ∪B_i', by level |Z ∩ B_i'| = 0..m."""
    for z in range(tpl.m + 1):
        per_part = [list(combinations(tpl.flexible(i), z)) for i in range(tpl.t)]
        for choice in product(*per_part):
            yield frozenset(b for part in choice for b in part)


def balanced_subset_count(t: int, m: int) -> int:
    """Σ_z C(m, z)^t."""
    return sum(comb(m, z) ** t for z in range(m + 1))


def perfect_matching(tpl: Template, Z: frozenset[int] = frozenset(),
                     edges: Sequence[Sequence[int]] | None = None,
                     budget_ms: int | None = None) -> list[int] | None:
    """
    Edge indices of a perfect matching of B - Z, or None.

    Raises:
        TemplateError: If the search runs out of budget
    """
    rows = tpl.edges if edges is None else edges
    remaining = tpl.vertices - Z
    outcome = ExactCover(rows, primary=remaining).solve(deadline_after(budget_ms))
    if outcome.status == "unknown":
        raise TemplateError(f"perfect matching search for |Z|={len(Z)} ran out of budget")
    return None if outcome.status == "none" else sorted(outcome.rows)


def find_failing_subset(tpl: Template) -> frozenset[int] | None:
    """
    First balanced Z for which B - Z has no perfect matching.

    Raises:
        TemplateError: If m exceeds the exhaustive verification cap
    """
    if tpl.m > TEMPLATE_VERIFY_CAP:
        raise TemplateError(f"exhaustive template verification capped at m ≤ {TEMPLATE_VERIFY_CAP}, got {tpl.m}")
    for Z in balanced_subsets(tpl):
        if perfect_matching(tpl, Z) is None:
            return Z
    return None


def verify_template(tpl: Template) -> bool:
    """True iff every balanced Z leaves a perfect matching (exhaustive)."""
    return find_failing_subset(tpl) is None


def _random_balanced(tpl: Template, rng: np.random.Generator) -> frozenset[int]:
    z = int(rng.integers(0, tpl.m + 1))
    picked = []
    for i in range(tpl.t):
        picked.extend(int(b) for b in rng.choice(tpl.flexible(i), size=z, replace=False))
    return frozenset(picked)


def _repair(t: int, m: int, edges: list[tuple[int, ...]], degree: dict[int, int], Z: frozenset[int],
            cap: int, rng: np.random.Generator, attempts: int = 50) -> bool:
    """
    Add the missing edges of a random perfect matching of B - Z, preferring
    the draw that needs the fewest new edges within the degree cap.
    """
    size = 2 * m
    remaining = [[b for b in range(i * size, (i + 1) * size) if b not in Z] for i in range(t)]
    present = set(edges)
    best = None
    for _ in range(attempts):
        order = [list(rng.permutation(part)) for part in remaining]
        candidate = [tuple(int(order[i][r]) for i in range(t)) for r in range(len(order[0]))]
        new = [e for e in candidate if e not in present]
        if any(degree.get(b, 0) + sum(b in e for e in new) > cap for e in new for b in e):
            continue
        if best is None or len(new) < len(best):
            best = new
        if not new:
            break
    if best is None:
        return False
    for e in best:
        edges.append(e)
        present.add(e)
        for b in e:
            degree[b] = degree.get(b, 0) + 1
    return True


def build_template(t: int, m: int, max_degree: int | None = None, seed: int = 0,
                   verify_cap: int | None = None, retries: int = 200) -> Template:
    """
    Randomised greedy template under a degree cap.

    Starts from the 2m identity lines (b_0^j, ..., b_{t-1}^j). Whenever a
    balanced Z leaves no perfect matching, the edges of a random perfect
    matching of B - Z are added. At m ≤ verify_cap every balanced Z is
    checked; above it a seeded sample of Z is repaired and the template is
    returned unverified.

    Args:
        t: Number of parts (≥ 3)
        m: Flexible subset size (≥ 1)
        max_degree: Degree cap; defaults to 40^t
        seed: Seed for the random repairs
        verify_cap: Largest m verified exhaustively (defaults to TEMPLATE_VERIFY_CAP)
        retries: Repairs allowed before giving up

    Raises:
        TemplateError: On bad parameters or when the repair budget runs out
    """
    if t < 3:
        raise TemplateError(f"t must be at least 3, got {t}")
    if m < 1:
        raise TemplateError(f"m must be at least 1, got {m}")
    cap = template_degree_cap(t) if max_degree is None else max_degree
    if cap < 1:
        raise TemplateError(f"max_degree must be at least 1, got {cap}")
    verify_cap = TEMPLATE_VERIFY_CAP if verify_cap is None else verify_cap
    exhaustive = m <= min(verify_cap, TEMPLATE_VERIFY_CAP)

    size = 2 * m
    edges = [tuple(i * size + j for i in range(t)) for j in range(size)]
    degree = {b: 1 for e in edges for b in e}
    rng = np.random.default_rng([seed, t, m])

    repairs = 0
    while True:
        tpl = Template(t=t, m=m, edges=tuple(edges), max_degree=cap)
        if exhaustive:
            failing = find_failing_subset(tpl)
        else:
            failing = None
            for _ in range(SPOT_CHECKS):
                Z = _random_balanced(tpl, rng)
                if perfect_matching(tpl, Z) is None:
                    failing = Z
                    break
        if failing is None:
            break
        if repairs >= retries or not _repair(t, m, edges, degree, failing, cap, rng):
            raise TemplateError(f"template construction for t={t}, m={m} failed after {repairs} repairs")
        repairs += 1

    logger.info("template t=%d m=%d: %d edges, Δ=%d, %d repairs, verified=%s",
                t, m, len(edges), tpl.degree(), repairs, exhaustive)
    return Template(t=t, m=m, edges=tuple(edges), max_degree=cap, verified=exhaustive)
