"""
Assemble Node - Concatenates the phase certificates and verifies the result.
"""
import logging

from src.models.factor import FactorCertificate
from src.nodes.phase import done, fail, halted, skip
from src.services.factor_service import verify_factor
from src.state import PipelineState

logger = logging.getLogger(__name__)

PHASE = "assemble"


def assemble_node(state: PipelineState) -> dict:
    """
    Merge bulk, leftover and absorber cycles and verify them as a
    C_t-factor of the whole host.

    Args:
        state: Workflow state after the absorb phase

    Returns:
        Dict with state updates
    """
    if halted(state):
        return skip(PHASE, "earlier phase failed")
    pg, cfg = state["pg"], state["cfg"]

    cert = state["bulk"].certificate
    for key in ("leftover", "absorbed"):
        part = state.get(key)
        if part is not None:
            cert = cert.merged(part.certificate if key == "leftover" else part)
    cert = FactorCertificate(t=cfg.t, cycles=tuple(sorted(cert.cycles, key=lambda c: (min(c), c))))

    if not verify_factor(pg.graph, cert, cfg.t, range(pg.graph.n)):
        return fail(PHASE, "assembled cycles are not a C_t-factor of the host", cycles=len(cert.cycles))
    logger.info("pipeline produced a verified C_%d-factor with %d cycles", cfg.t, len(cert.cycles))
    return {"certificate": cert, **done(PHASE, cycles=len(cert.cycles))}
