"""
Leftover Node - Routes the bulk leftover through W.
"""
from src.nodes.phase import done, fail, halted, skip
from src.services.cover_service import CoverError, match_leftover
from src.state import PipelineState

PHASE = "leftover"


def leftover_node(state: PipelineState) -> dict:
    if halted(state):
        return skip(PHASE, "earlier phase failed")
    if state.get("skipped"):
        return skip(PHASE, "absorber phases skipped")
    try:
        match = match_leftover(state["pg"], state["bulk"].leftover, state["W"], state["cfg"])
    except CoverError as e:
        return fail(PHASE, str(e))
    return {
        "leftover": match,
        **done(PHASE, cycles=len(match.certificate.cycles), w_used_per_part=len(match.used_w[0])),
    }
