# LangGraph State Schema for the absorbing pipeline.

from typing import Annotated
from typing_extensions import NotRequired
from typing_extensions import TypedDict
from operator import add

from src.models.factor import FactorCertificate
from src.models.graph import PartitionedGraph
from src.models.pipeline import (
    BulkCover,
    LeftoverMatch,
    PhaseTrace,
    PipelineConfig,
    RootPlan,
    Template,
    WAbsorber,
)


class PipelineState(TypedDict):
    """
    Central state schema.
    """

    # INPUT
    pg: PartitionedGraph                   # Host blow-up
    cfg: PipelineConfig                    # Run configuration

    # TEMPLATE NODE OUTPUT
    m: NotRequired[int]                    # Template size after capacity planning (0 = skipped)
    template: NotRequired[Template]
    skipped: NotRequired[bool]             # Absorber phases skipped for lack of room

    # CARVE NODE OUTPUT
    W: NotRequired[tuple[frozenset[int], ...]]
    X: NotRequired[tuple[frozenset[int], ...]]

    # ROOTS NODE OUTPUT
    plan: NotRequired[RootPlan]

    # EMBED NODE OUTPUT
    wabsorber: NotRequired[WAbsorber]

    # BULK NODE OUTPUT
    bulk: NotRequired[BulkCover]

    # LEFTOVER NODE OUTPUT
    leftover: NotRequired[LeftoverMatch]

    # ABSORB NODE OUTPUT
    absorbed: NotRequired[FactorCertificate]

    # ASSEMBLE NODE OUTPUT
    certificate: NotRequired[FactorCertificate]

    #  TRACE AND ERRORS (Accumulating)
    # These use 'add' reducer
    trace: Annotated[list[PhaseTrace], add]   # One entry per phase
    errors: Annotated[list[str], add]         # "[phase] message" from any node
