"""
Embed Node - Places one absorber per template edge.
"""
import logging

from src.nodes.phase import done, fail, halted, skip
from src.services.embedding_service import EmbeddingError, build_w_absorber
from src.state import PipelineState

logger = logging.getLogger(__name__)

PHASE = "embed"


def embed_node(state: PipelineState) -> dict:
    """
    Build the W-absorber from the template, the carved sets and the root plan.

    Args:
        state: Workflow state with pg, cfg, template, W, X and plan

    Returns:
        Dict with state updates
    """
    if halted(state):
        return skip(PHASE, "earlier phase failed")
    if state.get("skipped"):
        return skip(PHASE, "absorber phases skipped")
    try:
        wabs = build_w_absorber(state["pg"], state["template"], state["W"], state["X"],
                                state["cfg"], plan=state["plan"])
    except EmbeddingError as e:
        return fail(PHASE, str(e))
    return {
        "wabsorber": wabs,
        **done(PHASE, absorbers=len(wabs.absorbers), vertices=len(wabs.vertex_set)),
    }
