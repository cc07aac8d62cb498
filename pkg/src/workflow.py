"""
LangGraph Workflow Definition - Wires the absorbing pipeline phases together.
"""
import logging
from typing import Any

from langgraph.graph import StateGraph, START, END

from src.models.graph import PartitionedGraph
from src.models.pipeline import PipelineConfig, PipelineResult
from src.state import PipelineState
from src.nodes.validation import validation_node
from src.nodes.template import template_node
from src.nodes.carve import carve_node
from src.nodes.roots import roots_node
from src.nodes.embed import embed_node
from src.nodes.bulk import bulk_node
from src.nodes.leftover import leftover_node
from src.nodes.absorb import absorb_node
from src.nodes.assemble import assemble_node

logger = logging.getLogger(__name__)

PHASES = ["validate", "template", "carve", "roots", "embed", "bulk", "leftover", "absorb", "assemble"]


class PipelineError(Exception):
    """Raised when a pipeline phase fails; carries the phase tag and partial artifacts."""

    def __init__(self, phase: str, message: str, partial: dict[str, Any] | None = None):
        super().__init__(f"[{phase}] {message}")
        self.phase = phase
        self.message = message
        self.partial = partial or {}


def create_pipeline_workflow() -> StateGraph:
    """
    Create and compile the absorbing pipeline workflow.

    Returns:
        Compiled LangGraph workflow ready to invoke
    """
    builder = StateGraph(PipelineState)

    # ADD NODES
    builder.add_node("validate", validation_node)
    builder.add_node("template", template_node)
    builder.add_node("carve", carve_node)
    builder.add_node("roots", roots_node)
    builder.add_node("embed", embed_node)
    builder.add_node("bulk", bulk_node)
    builder.add_node("leftover", leftover_node)
    builder.add_node("absorb", absorb_node)
    builder.add_node("assemble", assemble_node)

    # ADD EDGES
    builder.add_edge(START, "validate")
    for a, b in zip(PHASES, PHASES[1:]):
        builder.add_edge(a, b)
    builder.add_edge("assemble", END)

    # COMPILE
    workflow = builder.compile()

    return workflow


def run_pipeline(pg: PartitionedGraph, cfg: PipelineConfig) -> PipelineResult:
    """
    Run every phase and return the verified factor of the whole host.

    Args:
        pg: Host blow-up with equal parts, ñ divisible by t
        cfg: Run configuration

    Returns:
        PipelineResult with the certificate and the phase trace

    Raises:
        PipelineError: Tagged with the first failing phase; `partial` holds
            the trace and every artifact produced before the failure
    """
    final_state = get_workflow().invoke({"pg": pg, "cfg": cfg, "trace": [], "errors": []})

    if final_state["errors"]:
        first = final_state["errors"][0]
        phase, _, message = first.partition("] ")
        partial = {k: v for k, v in final_state.items() if k not in ("pg", "cfg", "errors")}
        raise PipelineError(phase.lstrip("["), message, partial)

    wabs = final_state.get("wabsorber")
    template = final_state.get("template")
    return PipelineResult(
        certificate=final_state["certificate"],
        trace=final_state["trace"],
        m=final_state.get("m", 0),
        template_edges=len(template.edges) if template is not None and not final_state.get("skipped") else 0,
        absorber_vertices=len(wabs.vertex_set) if wabs is not None else 0,
    )


# Create a singleton workflow instance for reuse
_workflow_instance = None


def get_workflow():
    """
    Get or create the workflow instance (singleton pattern).

    Returns:
        Compiled LangGraph workflow
    """
    global _workflow_instance
    if _workflow_instance is None:
        _workflow_instance = create_pipeline_workflow()
    return _workflow_instance
