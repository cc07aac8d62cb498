"""
Bulk Node - Canonical packing of everything outside the absorber.
"""
import logging

from src.nodes.phase import done, fail, halted, skip
from src.services.cover_service import CoverError, cover_bulk
from src.state import PipelineState

logger = logging.getLogger(__name__)

PHASE = "bulk"


def bulk_node(state: PipelineState) -> dict:
    """
    Cover the parts minus V(A) up to a leftover of at most
    min(⌊ρñ⌋, ⌊m/(t-1)⌋) per part, so the W-residue stays absorbable.
    Without an absorber the leftover must be zero.

    Args:
        state: Workflow state with pg, cfg and, unless skipped, wabsorber

    Returns:
        Dict with state updates
    """
    if halted(state):
        return skip(PHASE, "earlier phase failed")
    pg, cfg = state["pg"], state["cfg"]
    skipped = state.get("skipped", False)
    avoid = frozenset() if skipped else state["wabsorber"].vertex_set
    max_leftover = 0 if skipped else state["m"] // (cfg.t - 1)
    try:
        bulk = cover_bulk(pg, avoid, cfg.rho, cfg, max_leftover=max_leftover)
    except CoverError as e:
        return fail(PHASE, str(e))

    left = len(bulk.leftover[0])
    if not bulk.reached_target:
        return {
            "bulk": bulk,
            **fail(PHASE, f"{left} vertices per part left uncovered, target {bulk.target}",
                   cycles=len(bulk.certificate.cycles), leftover=left),
        }
    return {
        "bulk": bulk,
        **done(PHASE, cycles=len(bulk.certificate.cycles), leftover=left, target=bulk.target,
               restarts=bulk.restarts),
    }
