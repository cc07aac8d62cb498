"""
Pydantic models for random-graph samples, attacks and empirical probes.
"""
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from src.models.common import Rational
from src.models.factor import FactorCertificate, SearchStatus
from src.models.graph import Graph


class GnpSample(BaseModel):
    """A G(n, p) draw, reproducible from (n, p, seed)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    graph: Graph = Field(description="Sampled graph")
    n: int = Field(ge=0, description="Number of vertices")
    p: Rational = Field(description="Edge probability")
    seed: int = Field(ge=0, description="Master seed")

    @property
    def edge_count(self) -> int:
        return self.graph.num_edges


class AttackReport(BaseModel):
    """Deletion accounting and post-attack outcome of an adversarial attack."""
    attack: Literal["second_neighborhood", "half_cut"] = Field(description="Attack applied")
    target: list[int] = Field(description="Attacked vertex, or the cut-off set")
    deleted_edges: int = Field(ge=0, description="Edges removed from the source graph")
    max_deleted_degree_fraction: Rational = Field(description="max over v of deleted-degree(v)/deg(v)")
    min_deleted_degree_fraction: Rational = Field(description="min over v of deleted-degree(v)/deg(v)")
    post_property: str = Field(description="Name of the property checked after the attack")
    post_value: bool = Field(description="Whether the property holds after the attack")
    post_status: SearchStatus | None = Field(default=None, description="Factor search status, for factor properties")


class ProbeRow(BaseModel):
    """One trial of an empirical predicate check."""
    trial: int = Field(description="Trial index")
    quantity: float = Field(description="Measured left-hand side")
    threshold: float = Field(description="Bound the quantity is compared with")
    passed: bool = Field(serialization_alias="pass", description="Predicate holds on this trial")


class ProbeReport(BaseModel):
    """Per-trial evidence for an empirical predicate; margins, never proofs."""
    probe: Literal["edge_bound", "k_expansion"] = Field(description="Predicate probed")
    regime: str = Field(default="", description="Set-size regime used for sampling")
    parameters: dict[str, str] = Field(default_factory=dict, description="Parameters as strings")
    rows: list[ProbeRow] = Field(default_factory=list, description="One row per trial")

    @property
    def violations(self) -> int:
        return sum(1 for row in self.rows if not row.passed)

    @property
    def pass_rate(self) -> float:
        return 1.0 if not self.rows else 1 - self.violations / len(self.rows)


class RobustExpansionRow(BaseModel):
    """Outcome of deleting ∇(Q) for one Q size."""
    q_size: int = Field(description="|Q|")
    newly_non_expanding: int = Field(description="Vertices of U expanding before but not after")
    ceiling: float = Field(description="K/p ceiling for comparison")
    vertices: list[int] = Field(default_factory=list, description="The newly non-expanding vertices")


class CycleCoverReport(BaseModel):
    """Outcome of covering X by disjoint t-cycles through U."""
    status: SearchStatus = Field(description="found, none or unknown")
    certificate: FactorCertificate | None = Field(default=None, description="Cycles covering X, when found")
    min_degree_ratio: Rational = Field(description="min over X ∪ U of deg(v, U)/(|U|p)")
    high_degree_exceptions: int = Field(description="Vertices of U with deg(u, U) < (1/2+α)|U|p")
    hypotheses_hold: bool = Field(description="Minimum degree at least α|U|p for every vertex of X ∪ U")
    auxiliary_edges: int = Field(description="Edges of the auxiliary hypergraph")
    truncated: bool = Field(default=False, description="Some vertex hit the auxiliary edge cap")
