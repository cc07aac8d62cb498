"""
Pydantic models for the absorbing pipeline: templates, root plans,
embedded absorbers, phase results and the run configuration.
"""
from fractions import Fraction
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.common import Rational
from src.models.factor import FactorCertificate, Hypergraph
from src.models.graph import Graph


class Template(BaseModel):
    """
    t-partite t-uniform hypergraph B with parts B_0..B_{t-1} of size 2m.

    Vertex j of part i has id i*2m + j; ids with j < m form the flexible
    subset B_i'. Each edge lists its vertices in part order.
    """
    model_config = ConfigDict(frozen=True)

    t: int = Field(ge=3, description="Number of parts")
    m: int = Field(ge=1, description="Flexible subset size; parts have 2m vertices")
    edges: tuple[tuple[int, ...], ...] = Field(default=(), description="Edges, one vertex per part in part order")
    max_degree: int = Field(ge=1, description="Degree cap used during construction")
    verified: bool = Field(default=False, description="Exhaustively verified over every balanced Z")

    @model_validator(mode="after")
    def _edges_transversal(self) -> "Template":
        size = 2 * self.m
        for idx, e in enumerate(self.edges):
            if len(e) != self.t or any(b // size != i or b < 0 for i, b in enumerate(e)):
                raise ValueError(f"template edge {idx} does not take one vertex per part in order")
        return self

    def vertex(self, i: int, j: int) -> int:
        return i * 2 * self.m + j

    def part(self, i: int) -> list[int]:
        return list(range(i * 2 * self.m, (i + 1) * 2 * self.m))

    def flexible(self, i: int) -> list[int]:
        return list(range(i * 2 * self.m, i * 2 * self.m + self.m))

    def is_flexible(self, b: int) -> bool:
        return b % (2 * self.m) < self.m

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(range(self.t * 2 * self.m))

    def degree(self) -> int:
        """Δ(B)."""
        counts: dict[int, int] = {}
        for e in self.edges:
            for b in e:
                counts[b] = counts.get(b, 0) + 1
        return max(counts.values(), default=0)

    def hypergraph(self) -> Hypergraph:
        return Hypergraph(vertices=self.vertices, edges=tuple(frozenset(e) for e in self.edges))


class RootPlan(BaseModel):
    """Bijection f from template vertices to W ∪ X and one root tuple per template edge."""
    model_config = ConfigDict(frozen=True)

    root_map: dict[int, int] = Field(description="Template vertex -> host vertex")
    root_tuples: tuple[tuple[int, ...], ...] = Field(description="R_e = (f(b_0), ..., f(b_{t-1})) per edge")


class EmbeddedAbsorber(BaseModel):
    """One R_e-absorber placed in the host, with both of its factors mapped."""
    model_config = ConfigDict(frozen=True)

    edge: int = Field(description="Template edge index")
    roots: tuple[int, ...] = Field(description="Host roots R_e in part order")
    mapping: tuple[int, ...] = Field(description="Gadget vertex -> host vertex")
    full_factor: FactorCertificate = Field(description="Factor of the embedded absorber, roots included")
    rootless_factor: FactorCertificate = Field(description="Factor of the embedded absorber minus its roots")

    @property
    def vertex_set(self) -> frozenset[int]:
        return frozenset(self.mapping)


class WAbsorber(BaseModel):
    """A W-absorber: a template, its root plan and one embedded absorber per template edge."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    host: Graph = Field(description="Host graph the absorbers live in")
    t: int = Field(description="Cycle length")
    template: Template = Field(description="Template hypergraph B")
    plan: RootPlan = Field(description="Root map f and root tuples")
    W: tuple[frozenset[int], ...] = Field(description="W_0..W_{t-1}")
    X: tuple[frozenset[int], ...] = Field(description="X_0..X_{t-1}")
    absorbers: tuple[EmbeddedAbsorber, ...] = Field(description="Embedded absorbers, one per template edge")

    @property
    def vertex_set(self) -> frozenset[int]:
        out: set[int] = set()
        for W_i, X_i in zip(self.W, self.X):
            out |= W_i | X_i
        for a in self.absorbers:
            out |= a.vertex_set
        return frozenset(out)


class BulkCover(BaseModel):
    """Greedy or exact canonical packing of the parts outside the absorber."""
    model_config = ConfigDict(frozen=True)

    certificate: FactorCertificate = Field(description="Canonical cycles found")
    leftover: tuple[frozenset[int], ...] = Field(description="Uncovered vertices Z_0..Z_{t-1}, equal sizes")
    target: int = Field(description="Allowed leftover per part")
    reached_target: bool = Field(description="Leftover per part is at most the target")
    restarts: int = Field(default=0, description="Greedy restarts used")


class LeftoverMatch(BaseModel):
    """Cycles covering the bulk leftover through W, and the W vertices they used."""
    model_config = ConfigDict(frozen=True)

    certificate: FactorCertificate = Field(description="One cycle per leftover vertex")
    used_w: tuple[frozenset[int], ...] = Field(description="W vertices used, per part")


class PhaseTrace(BaseModel):
    """One trace entry per pipeline phase."""
    phase: str = Field(description="Phase name")
    status: Literal["ok", "skipped", "failed"] = Field(description="Outcome")
    counts: dict[str, int] = Field(default_factory=dict, description="Phase statistics")
    note: str = Field(default="", description="Free-form detail")


class PipelineConfig(BaseModel):
    """
    Run configuration. Constants are exposed as knobs with documented
    defaults; none of them is derived.
    """
    t: int = Field(ge=3, description="Cycle length")
    k: int = Field(ge=2, description="Depth; t must be 2k-1 or 2k")
    epsilon: Rational = Field(default=Fraction(1, 10), description="Regularity tolerance")
    gamma: Rational = Field(default=Fraction(1, 10), description="Expansion slack")
    xi: Rational = Field(default=Fraction(1, 100), description="|W_i| = |X_i| = max(1, ⌊ξñ⌋) before capacity planning")
    rho: Rational = Field(default=Fraction(1, 10), description="Bulk leftover fraction")
    alpha: Rational = Field(default=Fraction(1), description="Relative density")
    p: Rational = Field(default=Fraction(1), description="Base density")
    seed: int = Field(default=0, ge=0, description="Master seed")
    m: int | None = Field(default=None, ge=1, description="Template size override")
    max_degree: int | None = Field(default=None, ge=1, description="Template degree cap (default 40^t)")
    verify_cap: int = Field(default=3, ge=0, description="Largest m verified exhaustively")
    template_budget_ms: int | None = Field(default=60_000, description="Template phase budget")
    embed_budget_ms: int | None = Field(default=60_000, description="Per-absorber embedding budget")
    bulk_budget_ms: int | None = Field(default=120_000, description="Bulk phase budget")
    leftover_budget_ms: int | None = Field(default=60_000, description="Leftover matching budget")
    embed_rounds: int = Field(default=3, ge=1, description="Embedding rounds; failed edges go first in the next")
    bulk_restarts: int = Field(default=5, ge=0, description="Greedy bulk restarts")
    force_embedding: bool = Field(default=True, description="Embed even if class membership fails")
    check_membership: bool = Field(default=False, description="Run the G_exp^k membership check before embedding")

    @model_validator(mode="after")
    def _ranges(self) -> "PipelineConfig":
        if self.t not in (2 * self.k - 1, 2 * self.k):
            raise ValueError(f"t must be 2k-1 or 2k, got t={self.t}, k={self.k}")
        for name in ("epsilon", "gamma", "xi"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if not 0 <= self.rho < 1:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        for name in ("alpha", "p"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")
        return self


class PipelineResult(BaseModel):
    """Verified factor of the whole instance plus the phase trace."""
    certificate: FactorCertificate = Field(description="Verified C_t-factor of V(pg)")
    trace: list[PhaseTrace] = Field(default_factory=list, description="Phase trace")
    m: int = Field(default=0, description="Template size used (0 when absorber phases were skipped)")
    template_edges: int = Field(default=0, description="Template edges, one absorber each")
    absorber_vertices: int = Field(default=0, description="|V(A)|")

