"""
Pydantic models for factor certificates and hypergraph matchings.
"""
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

SearchStatus = Literal["found", "none", "unknown"]


class FactorCertificate(BaseModel):
    """
    Vertex-disjoint t-cycles claimed to cover a vertex set.

    Nothing here is trusted: verify_factor re-checks every cycle against the host.
    """
    model_config = ConfigDict(frozen=True)

    t: int = Field(ge=3, description="Cycle length")
    cycles: tuple[tuple[int, ...], ...] = Field(default=(), description="Cycles as vertex tuples in cyclic order")

    @computed_field
    @property
    def covered(self) -> list[int]:
        return sorted(v for c in self.cycles for v in c)

    def vertex_set(self) -> frozenset[int]:
        return frozenset(v for c in self.cycles for v in c)

    def merged(self, other: "FactorCertificate") -> "FactorCertificate":
        """Concatenation; disjointness is left to verify_factor."""
        return FactorCertificate(t=self.t, cycles=self.cycles + other.cycles)

    def relabel(self, mapping) -> "FactorCertificate":
        return FactorCertificate(t=self.t, cycles=tuple(tuple(mapping[v] for v in c) for c in self.cycles))


class FactorSearchResult(BaseModel):
    """Three-valued outcome of a factor search."""
    model_config = ConfigDict(frozen=True)

    status: SearchStatus = Field(description="found, none (complete search) or unknown (budget exhausted)")
    certificate: FactorCertificate | None = Field(default=None, description="Set iff status is found")
    candidate_cycles: int = Field(default=0, description="Number of t-cycles the search branched over")
    steps: int = Field(default=0, description="Search nodes visited")

    @property
    def found(self) -> bool:
        return self.status == "found"


class Hypergraph(BaseModel):
    """
    Hypergraph on integer vertices with optional A/B side labels.

    Edges keep their insertion index; matchings refer to edges by index.
    """
    model_config = ConfigDict(frozen=True)

    vertices: frozenset[int] = Field(description="Vertex ids")
    edges: tuple[frozenset[int], ...] = Field(default=(), description="Edges as vertex sets")
    side_a: frozenset[int] = Field(default=frozenset(), description="A-side vertices for Haxell instances")

    @model_validator(mode="after")
    def _edges_inside(self) -> "Hypergraph":
        for i, e in enumerate(self.edges):
            if not e <= self.vertices:
                raise ValueError(f"edge {i} uses vertices outside the vertex set")
        return self

    @property
    def side_b(self) -> frozenset[int]:
        return self.vertices - self.side_a


class Matching(BaseModel):
    """Pairwise-disjoint edges of a hypergraph, by index."""
    model_config = ConfigDict(frozen=True)

    edges: tuple[int, ...] = Field(default=(), description="Indices into Hypergraph.edges")
    saturates: frozenset[int] = Field(default=frozenset(), description="Vertex set the matching was asked to cover")


class MatchingResult(BaseModel):
    """Three-valued outcome of a saturating-matching search."""
    model_config = ConfigDict(frozen=True)

    status: SearchStatus = Field(description="found, none or unknown")
    matching: Matching | None = Field(default=None, description="Set iff status is found")
    steps: int = Field(default=0, description="Search nodes visited")
