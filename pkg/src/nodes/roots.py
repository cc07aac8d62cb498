"""
Roots Node - Root map f and the root tuple of every template edge.
"""
from src.nodes.phase import done, fail, halted, skip
from src.services.embedding_service import EmbeddingError, plan_roots
from src.state import PipelineState

PHASE = "roots"


def roots_node(state: PipelineState) -> dict:
    if halted(state):
        return skip(PHASE, "earlier phase failed")
    if state.get("skipped"):
        return skip(PHASE, "absorber phases skipped")
    try:
        plan = plan_roots(state["template"], state["W"], state["X"], state["cfg"].seed)
    except EmbeddingError as e:
        return fail(PHASE, str(e))
    return {"plan": plan, **done(PHASE, tuples=len(plan.root_tuples))}
