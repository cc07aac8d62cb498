"""
Validation Node - Checks the host instance against the run configuration.
"""
import logging

from src.models.graph import GraphError
from src.nodes.phase import done, fail
from src.state import PipelineState

logger = logging.getLogger(__name__)

PHASE = "validate"


def validation_node(state: PipelineState) -> dict:
    """
    Validate the host blow-up before any phase touches it.

    This node checks:
    1. The number of parts equals cfg.t
    2. Parts have equal size ñ
    3. ñ is divisible by t
    4. There is no exceptional set

    Args:
        state: Workflow state with pg and cfg

    Returns:
        Dict with state updates
    """
    pg, cfg = state["pg"], state["cfg"]

    # 1. Part count
    if pg.t != cfg.t:
        return fail(PHASE, f"instance has {pg.t} parts, configuration says t={cfg.t}")

    # 2. Equal parts
    try:
        n_tilde = pg.n_tilde
    except GraphError as e:
        return fail(PHASE, str(e))

    # 3. Divisibility
    if n_tilde % cfg.t:
        return fail(PHASE, f"part size {n_tilde} is not divisible by t={cfg.t}")

    # 4. No exceptional vertices
    if pg.exceptional:
        return fail(PHASE, f"{len(pg.exceptional)} exceptional vertices; the pipeline covers the parts only")

    logger.info("pipeline input: t=%d, ñ=%d, %d edges", cfg.t, n_tilde, pg.graph.num_edges)
    return done(PHASE, n_tilde=n_tilde, edges=pg.graph.num_edges)
