"""Face traversal protocols: 2FACE and the FACE-1 / FACE-2 baselines.

Tokens travel around the faces of a planar graph. A right-hand token
(R) leaves a node along the edge that follows, clockwise, the edge it
arrived on; a left-hand token (L) turns the other way. The two hands walk
the same face in opposite directions.

Entry points are the designated end points of edges crossing the
source-destination segment. A token reaching an entry point may move to
(FACE-1, FACE-2) or spawn a new token pair into (2FACE) the face on the
other side of the crossing edge, provided that crossing is closer to the
destination than the one through which the token's face was entered.
"""
import logging
from enum import Enum
from typing import Callable, Dict, List, Optional, Set, Tuple

from attrs import define, evolve, field, frozen

from facewalk.exceptions import ConfigError, ProtocolError
from facewalk.geometry import Segment, dist
from facewalk.kernel import (
    Delivery,
    Message,
    Node,
    RunStats,
    Scheduler,
    Simulation,
    default_step_budget,
)
from facewalk.topology import (
    Crossing,
    FaceDecomposition,
    FaceId,
    GeometricGraph,
    NodeId,
    crossing_edges,
)

logger = logging.getLogger("facewalk.traversal")

# Crossing parameters closer than this are the same crossing.
T_TOLERANCE = 1e-12


class Hand(str, Enum):
    """Traversal hand."""

    L = "L"
    R = "R"

    @property
    def opposite(self) -> "Hand":
        return Hand.R if self == Hand.L else Hand.L


class Mode(str, Enum):
    """What a token is doing."""

    FACE = "face"
    FACE1 = "face1"
    FACE2 = "face2"
    GREEDY = "greedy"
    COMPASS = "compass"
    TRACEBACK = "traceback"
    PREFERRED = "preferred"
    CLEANUP = "cleanup"


@frozen
class Session:
    """Source and destination of the messages being routed.

    Attributes:
        source: the node that originates the messages.
        dest: the destination node.
        sd_segment: the segment every node learns from the message.
    """

    source: NodeId
    dest: NodeId
    sd_segment: Segment

    @classmethod
    def between(
        cls, g: GeometricGraph, source: NodeId, dest: NodeId
    ) -> "Session":
        for node in (source, dest):
            if not 0 <= node < len(g):
                raise ConfigError.from_code(
                    "invalid-node",
                    params={"node": node, "size": len(g)},
                )
        if source == dest:
            raise ConfigError.from_code(
                "same-endpoints", params={"node": source}
            )
        return cls(
            source=source,
            dest=dest,
            sd_segment=g.segment(source, dest),
        )

    @property
    def key(self) -> Tuple[NodeId, NodeId]:
        return (self.source, self.dest)


@frozen
class Token:
    """The routed message.

    Attributes:
        hand: left or right hand traversal (None outside face modes).
        source: session source, part of the matching key.
        dest: session destination, part of the matching key.
        face: the face being traversed (None outside face modes).
        mode: the mode of the token.
        entered_at: position, along the (source, dest) segment, of the
            crossing through which the current face was entered.
        trail: the nodes visited so far, for path metrics only.
        phase: FACE-1 progress (`explore` or `return`).
        origin_edge: FACE-1 first hop on the current face.
        best: FACE-1 best crossing found so far and its entry node.
        threshold: GFG recovery distance (distance to the destination
            of the local minimum that triggered face mode).
        end_of_session: set on the last message of a session.
    """

    hand: Optional[Hand]
    source: NodeId
    dest: NodeId
    face: Optional[FaceId]
    mode: Mode = Mode.FACE
    entered_at: float = 0.0
    trail: Tuple[NodeId, ...] = ()
    phase: str = "explore"
    origin_edge: Optional[Tuple[NodeId, NodeId]] = None
    best: Optional[Tuple[Crossing, NodeId]] = None
    threshold: Optional[float] = None
    end_of_session: bool = False

    def matches(self, other: "Token") -> bool:
        """Tell if `other` is this token's opposite-hand partner."""
        return (
            other.mode == self.mode
            and other.source == self.source
            and other.dest == self.dest
            and other.face == self.face
            and self.hand is not None
            and other.hand == self.hand.opposite
        )


@define
class EntryRecord:
    """What an entry point remembers during a session.

    Attributes:
        face: the face the entry point spawned tokens into.
        from_face: the face on which the entry point was first visited
            (None at the source).
        arrival_hand: hand of the token that first visited it.
        arrival_from: neighbour the first visiting token came from.
        hops: the first hop of each hand on `face`.
        preferred: the hand to forward session messages with on `face`,
            set by the traceback.
    """

    face: FaceId
    from_face: Optional[FaceId]
    arrival_hand: Optional[Hand]
    arrival_from: Optional[NodeId]
    hops: Dict[Hand, NodeId]
    preferred: Optional[Hand] = None

    @property
    def established(self) -> bool:
        return self.preferred is not None

    def as_dict(self) -> dict:
        return {
            "face": list(self.face),
            "from_face": list(self.from_face) if self.from_face else None,
            "arrival_hand": self.arrival_hand,
            "arrival_from": self.arrival_from,
            "hops": {h.value: n for h, n in sorted(self.hops.items())},
            "preferred": self.preferred,
        }


@define
class NodeRuntime(Node):
    """Protocol state of one node.

    Attributes:
        visited_marks: (session, face, corner, hand) of every token
            handled in the current run; used to assert that each corner
            of a face is visited at most once.
        faces_seen: (session, face) pairs this node took part in during
            the current run.
        entry_directions: session-scoped entry point records.
    """

    visited_marks: Set[tuple] = field(factory=set)
    faces_seen: Set[tuple] = field(factory=set)
    entry_directions: Dict[tuple, EntryRecord] = field(factory=dict)

    def reset_run(self) -> None:
        """Forget per-run state; session records survive."""
        self.send_queue.clear()
        self.visited_marks.clear()
        self.faces_seen.clear()


def make_runtimes(g: GeometricGraph) -> Dict[NodeId, NodeRuntime]:
    return {n: NodeRuntime(id=n) for n in g.nodes}


@define
class TraversalContext:
    """Read-only data shared by the handlers of one session.

    Attributes:
        g: the planar graph.
        fd: its faces.
        session: the session being routed.
        crossings: edges crossing the session segment, ordered.
        both_entry_points: make both end points of a crossing edge
            entry points instead of only the one closer to the
            destination.
    """

    g: GeometricGraph
    fd: FaceDecomposition
    session: Session
    crossings: Tuple[Crossing, ...] = ()
    both_entry_points: bool = False
    candidates: Dict[NodeId, List[Crossing]] = field(factory=dict)

    def __attrs_post_init__(self):
        if not self.crossings:
            self.crossings = crossing_edges(
                self.g, self.fd, self.session.source, self.session.dest
            )
        pd = self.g.position(self.session.dest)
        for crossing in self.crossings:
            a, b = crossing.edge
            if self.both_entry_points:
                chosen = [a, b]
            else:
                da = dist(self.g.position(a), pd)
                db = dist(self.g.position(b), pd)
                chosen = [a if (da, a) < (db, b) else b]
            for n in chosen:
                self.candidates.setdefault(n, []).append(crossing)

    def designated(self, n: NodeId) -> List[Crossing]:
        return self.candidates.get(n, [])


def next_hop(
    g: GeometricGraph, n: NodeId, prev: NodeId, hand: Hand
) -> NodeId:
    """The next node on the face per the hand's rule."""
    if hand == Hand.R:
        return g.cw_next(n, prev)
    return g.ccw_next(n, prev)


def corner_key(
    g: GeometricGraph, n: NodeId, prev: NodeId, hand: Hand
) -> Tuple[NodeId, NodeId]:
    """Identify the corner of the face at `n` a token passes through.

    The corner is named by the directed edge leaving it in right-hand
    order, so both hands name the same corner identically.
    """
    if hand == Hand.R:
        return (n, g.cw_next(n, prev))
    return (n, prev)


def first_face(
    g: GeometricGraph, fd: FaceDecomposition, n: NodeId, toward: NodeId
) -> Tuple[FaceId, Dict[Hand, NodeId]]:
    """The face at `n` that the (n, toward) segment starts into.

    Returns:
        The face and the first hop of each hand around it.
    """
    c = g.first_cw_from(n, g.position(toward))
    return fd.face_of[(n, c)], {Hand.R: c, Hand.L: g.ccw_next(n, c)}


def face_hops(
    g: GeometricGraph,
    fd: FaceDecomposition,
    n: NodeId,
    face: FaceId,
    m: NodeId,
) -> Dict[Hand, NodeId]:
    """First hops of each hand on `face` at the corner next to edge (n, m)."""
    if fd.face_of[(n, m)] == face:
        return {Hand.R: m, Hand.L: g.ccw_next(n, m)}
    if fd.face_of[(m, n)] == face:
        return {Hand.R: g.cw_next(n, m), Hand.L: m}
    raise ValueError(f"Edge ({n}, {m}) does not border face {face}.")


def is_entry_point(
    n: NodeId,
    incoming_face: FaceId,
    entered_at: float,
    ctx: TraversalContext,
) -> Optional[Tuple[FaceId, Crossing]]:
    """Tell if `n` is an entry point to a face adjacent to `incoming_face`.

    Only crossings strictly closer to the destination than `entered_at`
    where the segment leaves `incoming_face` count; among several, the
    one closest to the destination wins.

    Returns:
        The adjacent face and the crossing edge, or None.
    """
    best: Optional[Tuple[FaceId, Crossing]] = None
    for crossing in ctx.designated(n):
        if crossing.t <= entered_at + T_TOLERANCE:
            continue
        other = crossing.leads_from(incoming_face)
        if other is None:
            continue
        if best is None or crossing.t > best[1].t:
            best = (other, crossing)
    return best


def across(crossing: Crossing, n: NodeId) -> NodeId:
    """The other end point of the crossing edge."""
    a, b = crossing.edge
    return b if n == a else a


SpawnListener = Callable[
    [NodeRuntime, FaceId, Optional[Token], Optional[NodeId], Dict], None
]
VisitListener = Callable[[NodeRuntime, Optional[Token]], None]


class TwoFaceProtocol:
    """Bi-directional face traversal handler.

    An entry point spawns into a face only if it has not carried tokens
    of that face in the run: a face whose tokens already passed the node
    was spawned elsewhere and is being traversed. That also keeps spawns
    into a (session, face) at one per node.

    Args:
        ctx: the shared session data.
        mode: token mode; separate runs of the same session (first
            message, clean-up message) use distinct modes.
        on_spawn: called whenever a node spawns a pair, used to record
            entry point directions.
        on_visit: called for every handled token and, with None, for
            the origin.
    """

    def __init__(
        self,
        ctx: TraversalContext,
        mode: Mode = Mode.FACE,
        on_spawn: Optional[SpawnListener] = None,
        on_visit: Optional[VisitListener] = None,
    ):
        self.ctx = ctx
        self.mode = mode
        self.on_spawn = on_spawn
        self.on_visit = on_visit
        self.pairs = 0

    @property
    def key(self):
        return (self.ctx.session.key, self.mode.value)

    def seed(
        self,
        sim: Simulation,
        origin: Optional[NodeId] = None,
        trail: Tuple[NodeId, ...] = (),
    ) -> None:
        """Start the traversal: the origin is entry point of the first face."""
        s = self.ctx.session.source if origin is None else origin
        face, hops = first_face(
            self.ctx.g, self.ctx.fd, s, self.ctx.session.dest
        )
        node = sim.nodes[s]
        if self.on_visit is not None:
            self.on_visit(node, None)
        self.enter_faces(sim, node, face, hops, trail or (s,), 0.0)

    def enter_faces(
        self,
        sim: Simulation,
        node: NodeRuntime,
        face: FaceId,
        hops: Dict[Hand, NodeId],
        trail: Tuple[NodeId, ...],
        entered_at: float,
        parent: Optional[Token] = None,
        prev: Optional[NodeId] = None,
    ) -> None:
        """Spawn into `face` and on through every further face `node` is
        the entry point of.

        Each onward face is recorded against the token that reached
        `node`, so the traceback goes straight back to it.
        """
        g, fd = self.ctx.g, self.ctx.fd
        while True:
            self.spawn_pair(sim, node, face, hops, trail, entered_at)
            if self.on_spawn is not None:
                self.on_spawn(node, face, parent, prev, hops)
            entry = is_entry_point(node.id, face, entered_at, self.ctx)
            if entry is None or (self.key, entry[0]) in node.faces_seen:
                return
            face, crossing = entry
            hops = face_hops(g, fd, node.id, face, across(crossing, node.id))
            entered_at = crossing.t

    def spawn_pair(
        self,
        sim: Simulation,
        node: NodeRuntime,
        face: FaceId,
        hops: Dict[Hand, NodeId],
        trail: Tuple[NodeId, ...],
        entered_at: float,
    ) -> None:
        """Queue an L and an R token around `face`."""
        session = self.ctx.session
        corner = (node.id, hops[Hand.R])
        node.faces_seen.add((self.key, face))
        for hand in (Hand.L, Hand.R):
            node.visited_marks.add((self.key, face, corner, hand))
            sim.send(
                node.id,
                hops[hand],
                Token(
                    hand=hand,
                    source=session.source,
                    dest=session.dest,
                    face=face,
                    mode=self.mode,
                    entered_at=entered_at,
                    trail=trail,
                ),
            )
            sim.stats.spawns[hand.value] += 1
        self.pairs += 1

    def on_receive(
        self, node: NodeRuntime, message: Message, sim: Simulation
    ) -> str:
        token: Token = message.payload
        n, prev = node.id, message.sender
        g = self.ctx.g
        assert token.hand is not None and token.face is not None
        if self.on_visit is not None:
            self.on_visit(node, token)

        # A waiting partner means the face is done on this stretch.
        for queued in node.send_queue:
            if token.matches(queued.payload):
                node.send_queue.remove(queued)
                sim.stats.annihilations += 1
                sim.stats.face_annihilations[token.face] += 1
                return "annihilated"

        nxt = next_hop(g, n, prev, token.hand)
        mark = (self.key, token.face, corner_key(g, n, prev, token.hand),
                token.hand)
        if mark in node.visited_marks:
            sim.stats.violations.append((n, token.hand.value, token.face))
        node.visited_marks.add(mark)
        node.faces_seen.add((self.key, token.face))

        trail = token.trail + (n,)
        action = "forwarded"
        if n == token.dest:
            sim.stats.record_delivery(
                Delivery(
                    causal_depth=message.causal_depth,
                    step=sim.stats.steps,
                    hand=token.hand.value,
                    face=token.face,
                    arrival_edge=(prev, n),
                    path=trail,
                    payload=token,
                )
            )
            action = "delivered"
        else:
            entry = is_entry_point(n, token.face, token.entered_at, self.ctx)
            if entry is not None and (self.key, entry[0]) not in (
                node.faces_seen
            ):
                face, crossing = entry
                hops = face_hops(g, self.ctx.fd, n, face, across(crossing, n))
                self.enter_faces(
                    sim, node, face, hops, trail, crossing.t, token, prev
                )
                action = "spawned"

        sim.send(n, nxt, evolve(token, trail=trail))
        sim.stats.face_forwards[token.face] += 1
        return action


@define
class TraversalResult:
    """The outcome of one routing run.

    Attributes:
        stats: kernel counters.
        path: nodes visited by the first delivered token, source first.
        delivery: the first delivery (by causal depth), if any.
        runtimes: the node states at the end of the run.
        pairs: token pairs spawned (2FACE).
    """

    stats: RunStats
    path: Tuple[NodeId, ...] = ()
    delivery: Optional[Delivery] = None
    runtimes: Dict[NodeId, NodeRuntime] = field(factory=dict)
    pairs: int = 0

    @property
    def delivered(self) -> bool:
        return self.delivery is not None

    @property
    def hops(self) -> Optional[int]:
        return len(self.path) - 1 if self.path else None


def verify_accounting(stats: RunStats) -> None:
    """Check a quiescent 2FACE run: every corner handled at most once per
    hand and every spawned pair annihilated.

    Raises:
        ProtocolError: with the first violated property.
    """
    if stats.violations:
        node, hand, face = stats.violations[0]
        raise ProtocolError.from_code(
            "visited-twice", params={"node": node, "hand": hand, "face": face}
        )
    spawns_l, spawns_r = stats.spawns["L"], stats.spawns["R"]
    if not spawns_l == spawns_r == stats.annihilations:
        raise ProtocolError.from_code(
            "pair-accounting",
            params={
                "spawns_l": spawns_l,
                "spawns_r": spawns_r,
                "annihilations": stats.annihilations,
            },
        )


def _prepare(
    g: GeometricGraph, runtimes: Optional[Dict[NodeId, NodeRuntime]]
) -> Dict[NodeId, NodeRuntime]:
    if runtimes is None:
        return make_runtimes(g)
    for node in runtimes.values():
        node.reset_run()
    return runtimes


def route_2face(
    g: GeometricGraph,
    fd: FaceDecomposition,
    session: Session,
    scheduler: Optional[Scheduler] = None,
    both_entry_points: bool = False,
    runtimes: Optional[Dict[NodeId, NodeRuntime]] = None,
    on_spawn: Optional[SpawnListener] = None,
    mode: Mode = Mode.FACE,
    listeners=(),
    max_steps: Optional[int] = None,
    on_visit: Optional[VisitListener] = None,
) -> TraversalResult:
    """Route with bi-directional face traversal until quiescence."""
    ctx = TraversalContext(
        g=g, fd=fd, session=session, both_entry_points=both_entry_points
    )
    protocol = TwoFaceProtocol(
        ctx, mode=mode, on_spawn=on_spawn, on_visit=on_visit
    )
    runtimes = _prepare(g, runtimes)
    sim = Simulation(
        runtimes, protocol, scheduler or Scheduler.fifo(), listeners
    )
    protocol.seed(sim)
    budget = max_steps or default_step_budget(
        g.edge_count, len(ctx.crossings) * (2 if both_entry_points else 1) + 1
    )
    stats = sim.run_to_quiescence(budget, label="2face")
    delivery = stats.first_delivery()
    return TraversalResult(
        stats=stats,
        path=delivery.path if delivery else (),
        delivery=delivery,
        runtimes=runtimes,
        pairs=protocol.pairs,
    )


class FaceTwoProtocol:
    """Single token that switches faces at the first useful entry point."""

    def __init__(self, ctx: TraversalContext, hand: Hand):
        self.ctx = ctx
        self.hand = hand

    def seed(self, sim: Simulation) -> None:
        session = self.ctx.session
        face, hops = first_face(
            self.ctx.g, self.ctx.fd, session.source, session.dest
        )
        sim.send(
            session.source,
            hops[self.hand],
            Token(
                hand=self.hand,
                source=session.source,
                dest=session.dest,
                face=face,
                mode=Mode.FACE2,
                trail=(session.source,),
            ),
        )

    def on_receive(
        self, node: NodeRuntime, message: Message, sim: Simulation
    ) -> str:
        token: Token = message.payload
        n, prev = node.id, message.sender
        trail = token.trail + (n,)
        if n == token.dest:
            sim.stats.record_delivery(
                Delivery(
                    causal_depth=message.causal_depth,
                    step=sim.stats.steps,
                    hand=self.hand.value,
                    face=token.face,
                    arrival_edge=(prev, n),
                    path=trail,
                    payload=token,
                )
            )
            return "delivered"
        nxt, token, action = face2_step(self.ctx, n, prev, token)
        sim.send(n, nxt, evolve(token, trail=trail))
        sim.stats.face_forwards[token.face] += 1
        return action


def face2_step(
    ctx: TraversalContext, n: NodeId, prev: NodeId, token: Token
) -> Tuple[NodeId, Token, str]:
    """One FACE-2 forwarding decision at `n`."""
    assert token.hand is not None and token.face is not None
    entry = is_entry_point(n, token.face, token.entered_at, ctx)
    if entry is None:
        return next_hop(ctx.g, n, prev, token.hand), token, "forwarded"
    # `n` may also be the entry point out of the face it switches to.
    while entry is not None:
        face, crossing = entry
        hops = face_hops(ctx.g, ctx.fd, n, face, across(crossing, n))
        token = evolve(token, face=face, entered_at=crossing.t)
        entry = is_entry_point(n, face, crossing.t, ctx)
    return hops[token.hand], token, "switched"


def _single_token_run(
    g: GeometricGraph,
    protocol,
    scheduler: Optional[Scheduler],
    label: str,
    max_steps: Optional[int],
    listeners=(),
) -> TraversalResult:
    runtimes = make_runtimes(g)
    sim = Simulation(
        runtimes, protocol, scheduler or Scheduler.fifo(), listeners
    )
    protocol.seed(sim)
    budget = max_steps or default_step_budget(g.edge_count, len(g))
    stats = sim.run_to_quiescence(budget, label=label)
    delivery = stats.first_delivery()
    return TraversalResult(
        stats=stats,
        path=delivery.path if delivery else (),
        delivery=delivery,
        runtimes=runtimes,
    )


def route_face2(
    g: GeometricGraph,
    fd: FaceDecomposition,
    session: Session,
    hand: Hand = Hand.R,
    scheduler: Optional[Scheduler] = None,
    both_entry_points: bool = False,
    listeners=(),
    max_steps: Optional[int] = None,
) -> TraversalResult:
    """Route with single direction FACE-2 traversal.

    Raises:
        StepBudgetExceeded: when the token does not reach the destination.
    """
    ctx = TraversalContext(
        g=g, fd=fd, session=session, both_entry_points=both_entry_points
    )
    return _single_token_run(
        g, FaceTwoProtocol(ctx, hand), scheduler, "face2", max_steps,
        listeners,
    )


class FaceOneProtocol:
    """Single token that explores a whole face before switching.

    The token goes once around the current face remembering the entry
    point with the crossing closest to the destination, keeps going until
    it is back at that entry point and only then switches faces.
    """

    def __init__(self, ctx: TraversalContext, hand: Hand):
        self.ctx = ctx
        self.hand = hand

    def seed(self, sim: Simulation) -> None:
        session = self.ctx.session
        face, hops = first_face(
            self.ctx.g, self.ctx.fd, session.source, session.dest
        )
        first = hops[self.hand]
        sim.send(
            session.source,
            first,
            Token(
                hand=self.hand,
                source=session.source,
                dest=session.dest,
                face=face,
                mode=Mode.FACE1,
                trail=(session.source,),
                origin_edge=(session.source, first),
            ),
        )

    def on_receive(
        self, node: NodeRuntime, message: Message, sim: Simulation
    ) -> str:
        token: Token = message.payload
        n, prev = node.id, message.sender
        trail = token.trail + (n,)
        if n == token.dest:
            sim.stats.record_delivery(
                Delivery(
                    causal_depth=message.causal_depth,
                    step=sim.stats.steps,
                    hand=self.hand.value,
                    face=token.face,
                    arrival_edge=(prev, n),
                    path=trail,
                    payload=token,
                )
            )
            return "delivered"

        assert token.hand is not None and token.face is not None
        action = "forwarded"
        if token.phase == "explore":
            entry = is_entry_point(n, token.face, token.entered_at, self.ctx)
            if entry is not None and (
                token.best is None or entry[1].t > token.best[0].t
            ):
                token = evolve(token, best=(entry[1], n))

        nxt = next_hop(self.ctx.g, n, prev, token.hand)
        if token.phase == "explore" and (n, nxt) == token.origin_edge:
            if token.best is None:
                raise ProtocolError.from_code(
                    "not-delivered",
                    params={
                        "algorithm": "face1",
                        "source": token.source,
                        "dest": token.dest,
                    },
                )
            token = evolve(token, phase="return")

        if token.phase == "return" and token.best is not None:
            crossing, entry_node = token.best
            if n == entry_node:
                face = crossing.far_face
                hops = face_hops(
                    self.ctx.g, self.ctx.fd, n, face, across(crossing, n)
                )
                nxt = hops[token.hand]
                token = evolve(
                    token,
                    face=face,
                    entered_at=crossing.t,
                    phase="explore",
                    origin_edge=(n, nxt),
                    best=None,
                )
                action = "switched"

        sim.send(n, nxt, evolve(token, trail=trail))
        sim.stats.face_forwards[token.face] += 1
        return action


def route_face1(
    g: GeometricGraph,
    fd: FaceDecomposition,
    session: Session,
    hand: Hand = Hand.R,
    scheduler: Optional[Scheduler] = None,
    both_entry_points: bool = False,
    listeners=(),
    max_steps: Optional[int] = None,
) -> TraversalResult:
    """Route with single direction FACE-1 traversal."""
    ctx = TraversalContext(
        g=g, fd=fd, session=session, both_entry_points=both_entry_points
    )
    return _single_token_run(
        g, FaceOneProtocol(ctx, hand), scheduler, "face1", max_steps,
        listeners,
    )
