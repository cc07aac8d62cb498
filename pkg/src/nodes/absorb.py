"""
Absorb Node - Absorbs the used part of W into the W-absorber's factor.
"""
from src.nodes.phase import done, fail, halted, skip
from src.services.embedding_service import AbsorptionError, absorb
from src.state import PipelineState

PHASE = "absorb"


def absorb_node(state: PipelineState) -> dict:
    if halted(state):
        return skip(PHASE, "earlier phase failed")
    if state.get("skipped"):
        return skip(PHASE, "absorber phases skipped")
    Z = frozenset().union(*state["leftover"].used_w)
    try:
        cert = absorb(state["wabsorber"], Z)
    except AbsorptionError as e:
        return fail(PHASE, str(e))
    return {"absorbed": cert, **done(PHASE, absorbed=len(Z), cycles=len(cert.cycles))}
