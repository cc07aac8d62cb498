"""
Shared helpers for pipeline phase nodes.
"""
from src.models.pipeline import PhaseTrace
from src.state import PipelineState


def halted(state: PipelineState) -> bool:
    """True once any earlier phase has reported an error."""
    return bool(state.get("errors"))


def skip(phase: str, note: str) -> dict:
    """State update for a phase that did not run."""
    return {"trace": [PhaseTrace(phase=phase, status="skipped", note=note)]}


def fail(phase: str, message: str, **counts: int) -> dict:
    """State update for a failed phase; the message lands in the errors channel."""
    return {
        "trace": [PhaseTrace(phase=phase, status="failed", counts=counts, note=message)],
        "errors": [f"[{phase}] {message}"],
    }


def done(phase: str, note: str = "", **counts: int) -> dict:
    return {"trace": [PhaseTrace(phase=phase, status="ok", counts=counts, note=note)]}
