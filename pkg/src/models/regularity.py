"""
Pydantic models for regularity, expansion and class-membership reports.
"""
from fractions import Fraction
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.common import Rational


class RegularityParams(BaseModel):
    """
    ε, p and α of the regularity definitions.

    Densities are compared at the scaled density αp, so the allowed
    deviation is ε·α·p.
    """
    model_config = ConfigDict(frozen=True)

    epsilon: Rational = Field(description="Regularity parameter in (0, 1]")
    p: Rational = Field(description="Base density in (0, 1]")
    alpha: Rational = Field(default=Fraction(1), description="Relative density, > 0")
    density_slack: Rational | None = Field(
        default=None, description="Half-width of the inherited density window after slicing"
    )

    @model_validator(mode="after")
    def _ranges(self) -> "RegularityParams":
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not 0 < self.p <= 1:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        return self

    @property
    def scaled_density(self) -> Fraction:
        return self.alpha * self.p

    @property
    def tolerance(self) -> Fraction:
        return self.epsilon * self.alpha * self.p


class RegularityVerdict(BaseModel):
    """Refutation-only outcome of the sampled regularity check."""
    model_config = ConfigDict(frozen=True)

    status: Literal["no_violation_found", "violation"] = Field(description="Outcome")
    trials: int = Field(description="Subset pairs sampled")
    witness_x: tuple[int, ...] | None = Field(default=None, description="Violating X' when found")
    witness_y: tuple[int, ...] | None = Field(default=None, description="Violating Y' when found")
    pair_density: Rational = Field(description="d(X, Y)")
    witness_density: Rational | None = Field(default=None, description="d(X', Y') of the witness")


class ExpansionLevel(BaseModel):
    """One level of a (γ,k)-expansion profile."""
    level: int = Field(description="Level i in 1..k")
    size: int = Field(description="|N^i(v)| along the part sequence")
    threshold: Rational = Field(description="(1-γ)(ñαp)^i")
    passed: bool = Field(description="size >= threshold")


class ExpansionReport(BaseModel):
    """Expansion of one vertex in both cyclic directions."""
    vertex: int = Field(description="Vertex examined")
    part: int = Field(description="Part index of the vertex (0-based)")
    k: int = Field(description="Depth")
    gamma: Rational = Field(description="Expansion slack γ")
    forward: list[ExpansionLevel] = Field(default_factory=list, description="Levels along V_{i+1}, ..., V_{i+k}")
    backward: list[ExpansionLevel] = Field(default_factory=list, description="Levels along V_{i-1}, ..., V_{i-k}")

    @property
    def passed(self) -> bool:
        return all(level.passed for level in self.forward + self.backward)

    def passed_direction(self, direction: Literal["forward", "backward"]) -> bool:
        return all(level.passed for level in getattr(self, direction))


class MembershipReport(BaseModel):
    """Clause-by-clause result of a class-membership check."""
    t: int = Field(description="Number of parts")
    k: int = Field(description="Depth")
    params: RegularityParams = Field(description="Tolerances used")
    vertex_failures: dict[str, list[int]] = Field(
        default_factory=dict,
        description="Clause name -> failing vertices (degree, neighborhood, lower_regular)",
    )
    pair_failures: list[str] = Field(default_factory=list, description="Failing consecutive pairs")
    sampled_pairs: int = Field(default=0, description="Pairs checked by sampling rather than exhaustively")

    @property
    def member(self) -> bool:
        return not self.pair_failures and not any(self.vertex_failures.values())

    def failing_vertices(self) -> set[int]:
        return {v for vs in self.vertex_failures.values() for v in vs}


class CensusRow(BaseModel):
    """One (vertex, clause) line of a typicality census."""
    vertex: int
    clause: str
    passed: bool
