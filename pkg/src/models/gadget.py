"""
Pydantic models for gadgets (C_t-trees, ladders, switchers, absorbers).
"""
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from src.models.graph import Graph

GadgetKind = Literal["ct_tree", "ladder", "switcher", "absorber", "fconn", "fabs_minus"]


class RootedGadget(BaseModel):
    """
    A gadget graph with role labels and its defining t-cycles.

    Role labels:
        ct_tree    u[i,j]
        ladder     w[i,j]
        switcher   v, v', v:u[i,j], v':u[i,j], L1[j]:w[i,x], L2[j]:w[i,x]
        absorber   s[i], r[i], sw[i]/<switcher role>
        fconn      absorber roles plus R[i] for each contracted root tree
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    graph: Graph = Field(description="Gadget graph")
    kind: GadgetKind = Field(description="Construction that produced the gadget")
    t: int = Field(ge=3, description="Cycle length")
    k: int = Field(ge=1, description="Depth parameter")
    roles: dict[int, str] = Field(description="Vertex -> role label")
    cycle_list: tuple[tuple[int, ...], ...] = Field(description="Defining t-cycles (hints, never proof)")

    def vertex(self, role: str) -> int:
        """Vertex carrying `role`; raises KeyError if absent."""
        for v, r in self.roles.items():
            if r == role:
                return v
        raise KeyError(role)

    def roots(self) -> tuple[int, ...]:
        """r[1..t] for absorbers, (v, v') for switchers, u[0,1] for trees."""
        if self.kind == "absorber":
            return tuple(self.vertex(f"r[{i}]") for i in range(1, self.t + 1))
        if self.kind == "switcher":
            return (self.vertex("v"), self.vertex("v'"))
        if self.kind == "ct_tree":
            return (self.vertex("u[0,1]"),)
        return ()


class GadgetDocument(BaseModel):
    """JSON form of a RootedGadget."""
    kind: GadgetKind
    t: int
    k: int
    n: int
    edges: list[tuple[int, int]]
    roles: dict[str, str]
    cycles: list[list[int]]

    @classmethod
    def from_gadget(cls, gadget: RootedGadget) -> "GadgetDocument":
        return cls(
            kind=gadget.kind,
            t=gadget.t,
            k=gadget.k,
            n=gadget.graph.n,
            edges=gadget.graph.edge_list(),
            roles={str(v): r for v, r in sorted(gadget.roles.items())},
            cycles=[list(c) for c in gadget.cycle_list],
        )

    def to_gadget(self) -> RootedGadget:
        return RootedGadget(
            graph=Graph(self.n, self.edges),
            kind=self.kind,
            t=self.t,
            k=self.k,
            roles={int(v): r for v, r in self.roles.items()},
            cycle_list=tuple(tuple(c) for c in self.cycles),
        )


class PropertyCheck(BaseModel):
    """One row of the absorber property suite."""
    name: str = Field(description="Property checked")
    status: Literal["pass", "fail", "unknown"] = Field(description="Outcome")
    detail: str = Field(default="", description="Counts or values backing the outcome")

    @property
    def passed(self) -> bool:
        return self.status == "pass"
