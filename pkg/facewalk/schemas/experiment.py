from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

DEFAULT_NODE_COUNTS = list(range(40, 181, 20))
DEFAULT_U_VALUES = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2]
DEFAULT_ALGORITHMS = [
    "greedy",
    "compass",
    "face1",
    "face2",
    "2face",
    "gfg",
    "g2fg",
    "session",
]


class ExperimentConfig(BaseModel):
    """What an experiment sweeps and how."""

    node_counts: List[int] = Field(
        default_factory=lambda: list(DEFAULT_NODE_COUNTS),
        description="Number of nodes of the generated graphs.",
    )
    area_side: float = Field(
        2.0, gt=0, description="Side of the square nodes are placed in."
    )
    u_values: List[float] = Field(
        default_factory=lambda: list(DEFAULT_U_VALUES),
        description="Connectivity radii.",
    )
    graphs_per_density: int = Field(
        20, gt=0, description="Connected graphs per (n, u) cell."
    )
    pairs_per_graph: int = Field(
        20, gt=0, description="Source-destination pairs per graph."
    )
    master_seed: int = Field(
        0, ge=0, description="Seed every per-run seed derives from."
    )
    algorithms: List[str] = Field(
        default_factory=lambda: list(DEFAULT_ALGORITHMS),
        description="Algorithm identifiers to run on every pair.",
    )
    attempt_limit: int = Field(
        500,
        gt=0,
        description=(
            "Rejected generation attempts after which a cell is discarded."
        ),
    )
    both_entry_points: bool = Field(
        False,
        description="Make both end points of a crossing edge entry points.",
    )
    hand: Literal["L", "R"] = Field(
        "R", description="Hand of the single direction algorithms."
    )
    session_messages: int = Field(
        5, gt=0, description="Messages per session of the `session` row."
    )
    scheduler: Literal["fifo", "random"] = Field(
        "fifo", description="Kernel scheduling policy."
    )
    workers: int = Field(
        1, gt=0, description="Worker processes; 1 runs in process."
    )

    @field_validator("node_counts")
    @classmethod
    def check_node_counts(cls, value: List[int]) -> List[int]:
        if not value or any(n < 2 for n in value):
            raise ValueError("Node counts must be at least 2.")
        return value

    @field_validator("algorithms")
    @classmethod
    def check_algorithms(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("At least one algorithm is needed.")
        return value

    @model_validator(mode="after")
    def check_radii(self):
        if not self.u_values:
            raise ValueError("At least one connectivity radius is needed.")
        for u in self.u_values:
            if not 0 < u <= self.area_side:
                raise ValueError(
                    f"Connectivity radius {u} is outside "
                    f"(0, {self.area_side}]."
                )
        return self


class RouteMetrics(BaseModel):
    """One algorithm on one (graph, pair). Field order is the CSV order."""

    graph_id: str = Field(..., description="Cell and graph index.")
    n: int
    u: float
    pair_id: int
    src: int
    dst: int
    algorithm: str
    delivered: bool
    path_hops: Optional[int] = Field(
        None, description="Hops of the first delivered route."
    )
    preferred_hops: Optional[int] = Field(
        None, description="Hops of the preferred path (bi-directional)."
    )
    total_messages: int = Field(
        ..., description="Messages sent, traceback and clean-up included."
    )
    causal_latency: Optional[int] = Field(
        None, description="Causal depth of the first delivery."
    )
    shortest_planar_hops: int
    shortest_full_hops: int


class AggregateRow(BaseModel):
    """Per (n, u, algorithm) summary of a sweep.

    Comparative columns are set for the bi-directional algorithms against
    their single direction baseline and are None otherwise.
    """

    n: int
    u: float
    algorithm: str
    baseline: Optional[str] = Field(
        None, description="The single direction algorithm compared to."
    )
    runs: int
    delivery_rate: float
    mean_path_hops: Optional[float] = None
    mean_preferred_hops: Optional[float] = None
    mean_total_messages: float
    mean_causal_latency: Optional[float] = None
    near_optimality: Optional[float] = Field(
        None,
        description=(
            "Mean of (preferred, else delivered) hops over shortest "
            "planar hops."
        ),
    )
    improvement: Optional[float] = Field(
        None,
        description=(
            "(single direction hops - preferred hops) / preferred hops, "
            "on the means."
        ),
    )
    hop_ratio: Optional[float] = Field(
        None,
        description="Mean of single direction hops over preferred hops.",
    )
    message_overhead: Optional[float] = Field(
        None,
        description="Mean messages of this row minus the baseline's.",
    )
    break_even_k: Optional[float] = Field(
        None,
        description="Mean break-even session length; None if never.",
    )


class RouteReport(BaseModel):
    """What the `route` command prints."""

    algorithm: str
    src: int
    dst: int
    delivered: bool
    path: List[int] = Field(
        default_factory=list, description="The first delivered route."
    )
    preferred_path: List[int] = Field(
        default_factory=list,
        description="The preferred path (bi-directional algorithms).",
    )
    path_hops: Optional[int] = None
    preferred_hops: Optional[int] = None
    total_messages: int
    overhead_messages: int = Field(
        0, description="Traceback and clean-up messages."
    )
    causal_latency: Optional[int] = None


class DiscardedCell(BaseModel):
    """A cell whose graphs could not be generated."""

    n: int
    u: float
    rejected: int
