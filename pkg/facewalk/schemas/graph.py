from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class NodeData(BaseModel):
    """A node of a stored graph."""

    id: int = Field(..., ge=0, description="Dense node identifier.")
    x: float = Field(..., description="Horizontal coordinate.")
    y: float = Field(..., description="Vertical coordinate.")


class GraphFile(BaseModel):
    """The interchange format between the `gen` and `route` stages.

    Edges are listed once, with the smaller identifier first.
    """

    area_side: float = Field(..., gt=0, description="Side of the area.")
    u: float = Field(..., gt=0, description="Connectivity radius.")
    seed: Optional[int] = Field(
        None, description="The seed that generated this graph."
    )
    nodes: List[NodeData] = Field(..., description="The nodes.")
    edges: List[Tuple[int, int]] = Field(..., description="The edges.")
    planar: bool = Field(
        False, description="Whether the edges were planarized."
    )

    @model_validator(mode="after")
    def model_validation(self):
        """Check that identifiers are dense and edges are canonical."""
        ids = [node.id for node in self.nodes]
        if sorted(ids) != list(range(len(ids))):
            raise ValueError("Node identifiers must be 0..n-1.")
        for a, b in self.edges:
            if not (0 <= a < b < len(ids)):
                raise ValueError(
                    f"Edge ({a}, {b}) must list existing nodes, "
                    "smaller identifier first."
                )
        return self


class PathSpec(BaseModel):
    """A labelled route to highlight in a figure."""

    label: str = Field(..., description="Legend label of the route.")
    nodes: List[int] = Field(..., description="The visited nodes.")


class FigureData(BaseModel):
    """Plot-ready description of a graph with highlighted routes."""

    nodes: List[NodeData]
    edges: List[Tuple[int, int]]
    paths: List[PathSpec]
