"""
Carve Node - Seeded choice of the root sets W_i and X_i.
"""
import numpy as np

from src.nodes.phase import done, halted, skip
from src.state import PipelineState

PHASE = "carve"


def carve_node(state: PipelineState) -> dict:
    """
    Draw disjoint W_i, X_i ⊆ V_i of size m each from a generator keyed by
    (seed, part).

    Args:
        state: Workflow state with pg, cfg and m

    Returns:
        Dict with state updates
    """
    pg, cfg = state["pg"], state["cfg"]
    empty = tuple(frozenset() for _ in range(pg.t))
    if halted(state):
        return skip(PHASE, "earlier phase failed")
    if state.get("skipped"):
        return {"W": empty, "X": empty, **skip(PHASE, "absorber phases skipped")}

    m = state["m"]
    W, X = [], []
    for i in range(pg.t):
        rng = np.random.default_rng([cfg.seed, 1, i])
        picked = rng.choice(sorted(pg.part(i)), size=2 * m, replace=False)
        W.append(frozenset(int(v) for v in picked[:m]))
        X.append(frozenset(int(v) for v in picked[m:]))
    return {"W": tuple(W), "X": tuple(X), **done(PHASE, per_part=m)}
