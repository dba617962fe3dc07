"""Unit-disk graphs, Gabriel planarization and planar face decomposition.

Graphs are immutable once built; every derived structure (faces,
crossings) is computed from a finished graph and can be shared freely
between experiment workers.
"""
import json
import logging
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from attrs import frozen
from pydantic import ValidationError

from facewalk.exceptions import ConfigError, NonPlanarGraph
from facewalk.geometry import (
    Orientation,
    Point,
    Segment,
    Sense,
    angle_of,
    angle_order_after,
    cross,
    dist,
    orientation,
    reflect,
    rotation,
    segments_intersect,
)
from facewalk.schemas.graph import GraphFile, NodeData

logger = logging.getLogger("facewalk.topology")

NodeId = int
DirectedEdge = Tuple[NodeId, NodeId]
FaceId = DirectedEdge

# Two nodes closer than this are considered to coincide.
COINCIDENCE_TOLERANCE = 1e-9


@frozen(slots=False)
class GeometricGraph:
    """Nodes embedded in the plane with angularly sorted adjacency.

    Attributes:
        positions: the position of each node, indexed by node id.
        adjacency: for each node the neighbours sorted by the angle of
            their direction, counter-clockwise from the +x axis.
        planar: set when the edges were planarized.
        area_side: side of the square the nodes were drawn from.
        u: the connectivity radius.
        seed: the seed that generated the graph, if any.
    """

    positions: Tuple[Point, ...]
    adjacency: Tuple[Tuple[NodeId, ...], ...]
    planar: bool = False
    area_side: float = 0.0
    u: float = 0.0
    seed: Optional[int] = None

    @classmethod
    def from_edges(
        cls,
        positions: Sequence[Point],
        edges: Iterable[DirectedEdge],
        planar: bool = False,
        area_side: float = 0.0,
        u: float = 0.0,
        seed: Optional[int] = None,
    ) -> "GeometricGraph":
        """Build a graph, sorting each neighbourhood by angle."""
        positions = tuple(positions)
        neighbours: List[set] = [set() for _ in positions]
        for a, b in edges:
            if a == b:
                raise ValueError(f"Self loop on node {a}.")
            neighbours[a].add(b)
            neighbours[b].add(a)
        adjacency = tuple(
            tuple(
                sorted(
                    nbrs,
                    key=lambda m, n=n: (
                        angle_of(positions[n], positions[m]),
                        m,
                    ),
                )
            )
            for n, nbrs in enumerate(neighbours)
        )
        return cls(
            positions=positions,
            adjacency=adjacency,
            planar=planar,
            area_side=area_side,
            u=u,
            seed=seed,
        )

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def nodes(self) -> range:
        return range(len(self.positions))

    def position(self, n: NodeId) -> Point:
        return self.positions[n]

    def neighbors(self, n: NodeId) -> Tuple[NodeId, ...]:
        return self.adjacency[n]

    def has_edge(self, a: NodeId, b: NodeId) -> bool:
        return b in self.adjacency[a]

    @cached_property
    def edges(self) -> Tuple[DirectedEdge, ...]:
        """Every edge once, smaller identifier first, sorted."""
        return tuple(
            sorted(
                (a, b)
                for a, nbrs in enumerate(self.adjacency)
                for b in nbrs
                if a < b
            )
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def segment(self, a: NodeId, b: NodeId) -> Segment:
        return Segment(self.positions[a], self.positions[b])

    def _turn(self, center: NodeId, after: NodeId, sense: Sense) -> NodeId:
        nbrs = self.adjacency[center]
        by_position = {self.positions[m]: m for m in nbrs}
        chosen = angle_order_after(
            self.positions[center],
            self.positions[after],
            [self.positions[m] for m in nbrs],
            sense,
        )
        return by_position[chosen]

    def cw_next(self, center: NodeId, after: NodeId) -> NodeId:
        """The neighbour of `center` that follows `after` clockwise.

        This is the right-hand rule: a token that arrived at `center`
        from `after` leaves towards the returned node. A pendant node
        returns `after` itself.
        """
        return self._turn(center, after, Sense.CW)

    def ccw_next(self, center: NodeId, after: NodeId) -> NodeId:
        """The neighbour of `center` that follows `after` counter-clockwise.

        This is the left-hand rule.
        """
        return self._turn(center, after, Sense.CCW)

    def first_cw_from(self, center: NodeId, toward: Point) -> NodeId:
        """The first neighbour met rotating clockwise from a direction.

        A neighbour lying exactly in that direction is returned first.
        """
        nbrs = self.adjacency[center]
        if not nbrs:
            raise ValueError(f"Node {center} has no neighbours.")
        origin = self.positions[center]
        start = angle_of(origin, toward)
        return min(
            nbrs,
            key=lambda m: rotation(
                start, angle_of(origin, self.positions[m]), Sense.CW
            ),
        )

    @cached_property
    def nx_graph(self) -> nx.Graph:
        """The graph as a networkx object (used for BFS queries)."""
        result = nx.Graph()
        result.add_nodes_from(self.nodes)
        result.add_edges_from(self.edges)
        return result

    def is_connected(self) -> bool:
        return len(self) > 0 and nx.is_connected(self.nx_graph)

    def to_file(self) -> GraphFile:
        return GraphFile(
            area_side=self.area_side or 1.0,
            u=self.u or 1.0,
            seed=self.seed,
            nodes=[
                NodeData(id=n, x=p.x, y=p.y)
                for n, p in enumerate(self.positions)
            ],
            edges=list(self.edges),
            planar=self.planar,
        )

    @classmethod
    def from_file(cls, data: GraphFile) -> "GeometricGraph":
        nodes = sorted(data.nodes, key=lambda node: node.id)
        return cls.from_edges(
            positions=[Point(node.x, node.y) for node in nodes],
            edges=data.edges,
            planar=data.planar,
            area_side=data.area_side,
            u=data.u,
            seed=data.seed,
        )


def save_graph(g: GeometricGraph, path: str) -> None:
    """Write a graph in the JSON interchange format."""
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(g.to_file().model_dump_json(indent=2))
    except OSError as exc:
        raise ConfigError.from_code(
            "io-error", params={"path": path, "reason": str(exc)}
        ) from exc


def load_graph(path: str) -> GeometricGraph:
    """Read a graph in the JSON interchange format."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = GraphFile.model_validate(json.load(f))
    except (OSError, ValueError, ValidationError) as exc:
        raise ConfigError.from_code(
            "invalid-graph-file",
            params={"path": path, "reason": str(exc)},
            field="graph",
        ) from exc
    return GeometricGraph.from_file(data)


def _has_coincident_points(coords: np.ndarray) -> bool:
    diff = coords[:, None, :] - coords[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, np.inf)
    return bool((d2 < COINCIDENCE_TOLERANCE**2).any())


def generate_unit_disk(
    n: int,
    area_side: float,
    u: float,
    seed: Optional[int] = None,
    positions: Optional[Sequence[Tuple[float, float]]] = None,
) -> Optional[GeometricGraph]:
    """Generate a connected unit-disk graph.

    Args:
        n: the number of nodes (at least two).
        area_side: the side of the square the nodes are drawn from.
        u: the connectivity radius; nodes closer than `u` are connected.
        seed: the seed of the random number generator.
        positions: use these positions instead of random ones.

    Returns:
        The graph, or None (rejected) when it is disconnected or two
        nodes coincide. The caller regenerates with another seed.
    """
    if n < 2:
        raise ValueError("A unit-disk graph needs at least two nodes.")
    if u <= 0:
        raise ValueError("The connectivity radius must be positive.")
    if positions is None:
        rng = np.random.default_rng(seed)
        coords = rng.uniform(0.0, area_side, size=(n, 2))
    else:
        coords = np.asarray(positions, dtype=float)
        if coords.shape != (n, 2):
            raise ValueError(f"Expected {n} positions.")

    if _has_coincident_points(coords):
        logger.debug("Rejected graph (seed %s): coincident nodes.", seed)
        return None

    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    ii, jj = np.nonzero(np.triu(d < u, k=1))
    result = GeometricGraph.from_edges(
        positions=[Point(x, y) for x, y in coords],
        edges=zip(ii.tolist(), jj.tolist()),
        planar=False,
        area_side=area_side,
        u=u,
        seed=seed,
    )
    if not result.is_connected():
        logger.debug("Rejected graph (seed %s): disconnected.", seed)
        return None
    return result


def gabriel_planarize(g: GeometricGraph) -> GeometricGraph:
    """Keep the edges whose diameter circle holds no other node."""
    coords = np.array([p.as_tuple() for p in g.positions])
    kept = []
    for a, b in g.edges:
        mid = (coords[a] + coords[b]) / 2.0
        radius2 = float(np.sum((coords[a] - coords[b]) ** 2)) / 4.0
        d2 = np.sum((coords - mid) ** 2, axis=1)
        d2[[a, b]] = np.inf
        if (d2 < radius2 * (1.0 - 1e-12)).any():
            continue
        kept.append((a, b))
    return GeometricGraph.from_edges(
        positions=g.positions,
        edges=kept,
        planar=True,
        area_side=g.area_side,
        u=g.u,
        seed=g.seed,
    )


def mirror(g: GeometricGraph) -> GeometricGraph:
    """The same graph reflected about the vertical axis."""
    return GeometricGraph.from_edges(
        positions=[reflect(p) for p in g.positions],
        edges=g.edges,
        planar=g.planar,
        area_side=g.area_side,
        u=g.u,
        seed=g.seed,
    )


def count_proper_crossings(g: GeometricGraph) -> int:
    """Brute force count of properly intersecting edge pairs."""
    edges = g.edges
    result = 0
    for i, (a, b) in enumerate(edges):
        for c, d in edges[i + 1 :]:
            if len({a, b, c, d}) < 4:
                continue
            hit = segments_intersect(g.segment(a, b), g.segment(c, d))
            if hit is not None and hit.is_proper:
                result += 1
    return result


@frozen(slots=False)
class FaceDecomposition:
    """The faces of a connected planar graph.

    Faces are the orbits of the right-hand rule on directed edges. Each
    face is identified by the smallest directed edge of its orbit.

    Attributes:
        face_of: the face to the left of each directed edge.
        boundary: the directed edges of each face, in right-hand order.
        area: the signed area enclosed by each boundary walk.
        external: the unbounded face.
    """

    face_of: Dict[DirectedEdge, FaceId]
    boundary: Dict[FaceId, Tuple[DirectedEdge, ...]]
    area: Dict[FaceId, float]
    external: FaceId

    @property
    def faces(self) -> List[FaceId]:
        return sorted(self.boundary)

    def __len__(self) -> int:
        return len(self.boundary)

    def size(self, face: FaceId) -> int:
        return len(self.boundary[face])

    def nodes_of(self, face: FaceId) -> List[NodeId]:
        return sorted({a for a, _ in self.boundary[face]})

    def borders(self, a: NodeId, b: NodeId, face: FaceId) -> bool:
        """Tell if the undirected edge (a, b) lies on `face`."""
        return self.face_of[(a, b)] == face or self.face_of[(b, a)] == face


def decompose_faces(g: GeometricGraph) -> FaceDecomposition:
    """Decompose a connected planar graph into faces.

    Raises:
        NonPlanarGraph: when the graph is not flagged as planar or the
            resulting orbits violate Euler's formula.
    """
    if not g.planar:
        raise NonPlanarGraph.from_code(
            "non-planar", params={"reason": "the graph was not planarized"}
        )
    face_of: Dict[DirectedEdge, FaceId] = {}
    boundary: Dict[FaceId, Tuple[DirectedEdge, ...]] = {}
    area: Dict[FaceId, float] = {}
    origin = Point(0.0, 0.0)
    for start in sorted((a, b) for a in g.nodes for b in g.adjacency[a]):
        if start in face_of:
            continue
        orbit = []
        edge = start
        while True:
            orbit.append(edge)
            a, b = edge
            edge = (b, g.cw_next(b, a))
            if edge == start:
                break
        face = min(orbit)
        for edge in orbit:
            face_of[edge] = face
        boundary[face] = tuple(orbit)
        area[face] = 0.5 * sum(
            cross(origin, g.positions[a], g.positions[b]) for a, b in orbit
        )

    n_edges = g.edge_count
    if len(g) - n_edges + len(boundary) != 2:
        raise NonPlanarGraph.from_code(
            "non-planar",
            params={
                "reason": (
                    f"Euler check failed: {len(g)} nodes, {n_edges} edges, "
                    f"{len(boundary)} faces"
                )
            },
        )
    if not boundary:
        raise NonPlanarGraph.from_code(
            "non-planar", params={"reason": "the graph has no edges"}
        )
    external = min(boundary, key=lambda f: (area[f], f))
    return FaceDecomposition(
        face_of=face_of, boundary=boundary, area=area, external=external
    )


def shortest_path_hops(g: GeometricGraph, s: NodeId, d: NodeId) -> int:
    """Minimum hop count between two nodes (breadth first search)."""
    return nx.shortest_path_length(g.nx_graph, s, d)


@frozen
class Crossing:
    """An edge that properly crosses the source-destination segment.

    Attributes:
        edge: the crossing edge, smaller identifier first.
        point: where the edge crosses the segment.
        t: the position of `point` along the segment, 0 at the source
            and 1 at the destination.
        near_face: the face on the source side of the crossing.
        far_face: the face on the destination side of the crossing.
    """

    edge: DirectedEdge
    point: Point
    t: float
    near_face: FaceId
    far_face: FaceId

    def leads_from(self, face: FaceId) -> Optional[FaceId]:
        """The face the segment enters here when it leaves `face`.

        None unless `face` is the source side face; a crossing never
        leads back toward the source.
        """
        if face == self.near_face and face != self.far_face:
            return self.far_face
        return None


def crossing_edges(
    g: GeometricGraph, fd: FaceDecomposition, s: NodeId, d: NodeId
) -> Tuple[Crossing, ...]:
    """Edges properly crossing the (s, d) segment, ordered from `s`."""
    ps, pd = g.positions[s], g.positions[d]
    sd = Segment(ps, pd)
    length = dist(ps, pd)
    result = []
    for a, b in g.edges:
        if s in (a, b) or d in (a, b):
            continue
        hit = segments_intersect(sd, g.segment(a, b))
        if hit is None or not hit.is_proper:
            continue
        if orientation(g.positions[a], g.positions[b], ps) == (
            Orientation.COUNTER_CLOCKWISE
        ):
            near, far = fd.face_of[(a, b)], fd.face_of[(b, a)]
        else:
            near, far = fd.face_of[(b, a)], fd.face_of[(a, b)]
        result.append(
            Crossing(
                edge=(a, b),
                point=hit.point,
                t=dist(ps, hit.point) / length,
                near_face=near,
                far_face=far,
            )
        )
    result.sort(key=lambda c: (c.t, c.edge))
    return tuple(result)


def segment_is_clear(
    g: GeometricGraph, s: NodeId, d: NodeId, tolerance: float = 1e-9
) -> bool:
    """Tell if no node other than `s` and `d` lies on the (s, d) segment."""
    ps, pd = g.positions[s], g.positions[d]
    length = dist(ps, pd)
    if length < COINCIDENCE_TOLERANCE:
        return False
    for n, p in enumerate(g.positions):
        if n in (s, d):
            continue
        # Distance from p to the supporting line, then the projection.
        if abs(cross(ps, pd, p)) / length > tolerance:
            continue
        t = (
            (p.x - ps.x) * (pd.x - ps.x) + (p.y - ps.y) * (pd.y - ps.y)
        ) / (length * length)
        if -tolerance <= t <= 1.0 + tolerance:
            return False
    return True


def sample_pairs(
    g: GeometricGraph, count: int, rng: np.random.Generator
) -> List[DirectedEdge]:
    """Draw distinct (source, destination) pairs uniformly.

    Pairs whose segment passes through another node are skipped.
    """
    n = len(g)
    total = n * (n - 1)
    order = rng.permutation(total)
    result = []
    for index in order.tolist():
        s, rest = divmod(index, n - 1)
        d = rest if rest < s else rest + 1
        if not segment_is_clear(g, s, d):
            continue
        result.append((s, d))
        if len(result) == count:
            break
    return result
