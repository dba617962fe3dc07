"""End-to-end routing: greedy and compass modes, GFG, G2FG and sessions.

Greedy forwarding uses the full unit-disk graph; every face mode runs on
its planarized subgraph. Both graphs share node identifiers.
"""
import json
import logging
import math
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

from attrs import define, evolve, frozen

from facewalk.exceptions import ConfigError, ProtocolError
from facewalk.geometry import angle_of, dist
from facewalk.kernel import (
    Delivery,
    Message,
    RunStats,
    Scheduler,
    Simulation,
    default_step_budget,
)
from facewalk.topology import (
    FaceDecomposition,
    FaceId,
    GeometricGraph,
    NodeId,
    decompose_faces,
    gabriel_planarize,
)
from facewalk.traversal import (
    EntryRecord,
    Hand,
    Mode,
    NodeRuntime,
    Session,
    Token,
    TraversalContext,
    TraversalResult,
    TwoFaceProtocol,
    face2_step,
    first_face,
    make_runtimes,
    next_hop,
    route_2face,
    route_face1,
    route_face2,
)

logger = logging.getLogger("facewalk.routing")

# Algorithm identifiers accepted by the command line and the harness.
ALGORITHMS = (
    "greedy",
    "compass",
    "face1",
    "face2",
    "2face",
    "gfg",
    "g2fg",
    "session",
)

# Identifiers of known algorithms that are not implemented.
RESERVED_ALGORITHMS = ("void2", "2void", "g2vg", "shortcut2hop")

# Algorithms whose preferred path is learnt by a traceback.
BIDIRECTIONAL = ("2face", "g2fg", "session")

# Angles closer than this are a tie for compass routing.
ANGLE_TOLERANCE = 1e-9


def validate_algorithm(algorithm: str) -> str:
    """Return the identifier or raise a configuration error."""
    if algorithm in ALGORITHMS:
        return algorithm
    if algorithm in RESERVED_ALGORITHMS:
        raise ConfigError.from_code(
            "unimplemented-algorithm",
            params={"algorithm": algorithm},
            field="algorithm",
        )
    raise ConfigError.from_code(
        "unknown-algorithm",
        params={"algorithm": algorithm, "known": ", ".join(ALGORITHMS)},
        field="algorithm",
    )


def greedy_step(
    n: NodeId, dest: NodeId, g: GeometricGraph
) -> Optional[NodeId]:
    """The neighbour closest to `dest` if closer than `n` itself.

    Returns:
        The next hop, or None when `n` is a local minimum.
    """
    target = g.position(dest)
    best, best_dist = None, dist(g.position(n), target)
    for m in g.neighbors(n):
        d = dist(g.position(m), target)
        if d < best_dist or (d == best_dist and best is not None and m < best):
            best, best_dist = m, d
    return best


def compass_step(n: NodeId, dest: NodeId, g: GeometricGraph) -> NodeId:
    """The neighbour whose direction is closest to that of `dest`.

    Ties go to the smaller identifier.
    """
    center = g.position(n)
    heading = angle_of(center, g.position(dest))

    def deviation(m: NodeId) -> Tuple[float, NodeId]:
        delta = abs(angle_of(center, g.position(m)) - heading)
        delta = min(delta, 2.0 * math.pi - delta)
        return (round(delta / ANGLE_TOLERANCE) * ANGLE_TOLERANCE, m)

    return min(g.neighbors(n), key=deviation)


@frozen
class GreedyState:
    """Where a GFG token stands.

    Attributes:
        current: the node holding the token.
        best_dist_at_face_entry: distance to the destination of the local
            minimum that started face mode.
    """

    current: NodeId
    best_dist_at_face_entry: Optional[float] = None


def _deliver(sim: Simulation, message: Message, token: Token, trail) -> str:
    sim.stats.record_delivery(
        Delivery(
            causal_depth=message.causal_depth,
            step=sim.stats.steps,
            hand=token.hand.value if token.hand else None,
            face=token.face,
            arrival_edge=(message.sender, message.receiver),
            path=trail,
            payload=token,
        )
    )
    return "delivered"


class StepRouting:
    """Single token forwarded by a memoryless next-hop rule."""

    def __init__(
        self,
        g: GeometricGraph,
        session: Session,
        mode: Mode,
        rule: Callable[[NodeId, NodeId, GeometricGraph], Optional[NodeId]],
    ):
        self.g = g
        self.session = session
        self.mode = mode
        self.rule = rule

    def seed(self, sim: Simulation) -> None:
        s, d = self.session.key
        nxt = self.rule(s, d, self.g)
        if nxt is None:
            return
        sim.send(
            s,
            nxt,
            Token(hand=None, source=s, dest=d, face=None, mode=self.mode,
                  trail=(s,)),
        )

    def on_receive(self, node, message: Message, sim: Simulation) -> str:
        token: Token = message.payload
        trail = token.trail + (node.id,)
        if node.id == token.dest:
            return _deliver(sim, message, token, trail)
        nxt = self.rule(node.id, token.dest, self.g)
        if nxt is None:
            return "stopped"
        sim.send(node.id, nxt, evolve(token, trail=trail))
        return "forwarded"


def _run(g: GeometricGraph, protocol, scheduler, budget: int, label: str,
         listeners=()) -> TraversalResult:
    runtimes = make_runtimes(g)
    sim = Simulation(runtimes, protocol, scheduler or Scheduler.fifo(),
                     listeners)
    protocol.seed(sim)
    stats = sim.run_to_quiescence(budget, label=label)
    delivery = stats.first_delivery()
    return TraversalResult(
        stats=stats,
        path=delivery.path if delivery else (),
        delivery=delivery,
        runtimes=runtimes,
    )


def route_greedy(
    g: GeometricGraph, session: Session, scheduler=None, listeners=()
) -> TraversalResult:
    """Pure greedy forwarding; stops undelivered at a local minimum."""
    return _run(
        g, StepRouting(g, session, Mode.GREEDY, greedy_step), scheduler,
        len(g) + 1, "greedy", listeners,
    )


def route_compass(
    g: GeometricGraph, session: Session, scheduler=None, listeners=()
) -> TraversalResult:
    """Pure compass forwarding.

    A loop-free compass route has fewer hops than nodes, so running out
    of a |V| step budget means the token revisited a node: a livelock.

    Raises:
        StepBudgetExceeded: on a livelock.
    """
    return _run(
        g, StepRouting(g, session, Mode.COMPASS, compass_step), scheduler,
        len(g), "compass", listeners,
    )


class GfgProtocol:
    """Greedy forwarding with single direction FACE-2 recovery."""

    def __init__(
        self,
        g_full: GeometricGraph,
        g_planar: GeometricGraph,
        fd: FaceDecomposition,
        session: Session,
        hand: Hand,
        both_entry_points: bool = False,
    ):
        self.g_full = g_full
        self.g_planar = g_planar
        self.fd = fd
        self.session = session
        self.hand = hand
        self.both_entry_points = both_entry_points
        self.contexts: Dict[NodeId, TraversalContext] = {}
        self.state = GreedyState(current=session.source)
        self.transitions = 0

    def context(self, origin: NodeId) -> TraversalContext:
        """Face mode context of the (local minimum, destination) segment."""
        if origin not in self.contexts:
            self.contexts[origin] = TraversalContext(
                g=self.g_planar,
                fd=self.fd,
                session=Session.between(
                    self.g_planar, origin, self.session.dest
                ),
                both_entry_points=self.both_entry_points,
            )
        return self.contexts[origin]

    def seed(self, sim: Simulation) -> None:
        s, d = self.session.key
        token = Token(hand=None, source=s, dest=d, face=None,
                      mode=Mode.GREEDY, trail=())
        nxt, token = self.greedy_or_face(s, token)
        sim.send(s, nxt, evolve(token, trail=(s,)))

    def greedy_or_face(self, n: NodeId, token: Token) -> Tuple[NodeId, Token]:
        """Greedy next hop, or start face mode at a local minimum."""
        nxt = greedy_step(n, token.dest, self.g_full)
        if nxt is not None:
            return nxt, evolve(
                token, mode=Mode.GREEDY, hand=None, face=None, threshold=None
            )
        self.transitions += 1
        face, hops = first_face(self.g_planar, self.fd, n, token.dest)
        return hops[self.hand], evolve(
            token,
            mode=Mode.FACE2,
            hand=self.hand,
            face=face,
            source=n,
            entered_at=0.0,
            threshold=dist(self.g_full.position(n),
                           self.g_full.position(token.dest)),
        )

    def on_receive(self, node, message: Message, sim: Simulation) -> str:
        token: Token = message.payload
        n = node.id
        trail = token.trail + (n,)
        self.state = GreedyState(
            current=n, best_dist_at_face_entry=token.threshold
        )
        if n == token.dest:
            return _deliver(sim, message, token, trail)
        if token.mode == Mode.GREEDY:
            nxt, token = self.greedy_or_face(n, token)
            action = "forwarded" if token.mode == Mode.GREEDY else "switched"
        elif (
            dist(self.g_full.position(n), self.g_full.position(token.dest))
            < self.state.best_dist_at_face_entry
        ):
            nxt, token = self.greedy_or_face(n, token)
            action = "recovered"
        else:
            nxt, token, action = face2_step(
                self.context(token.source), n, message.sender, token
            )
        sim.send(n, nxt, evolve(token, trail=trail))
        return action


def route_gfg(
    g_full: GeometricGraph,
    g_planar: GeometricGraph,
    fd: FaceDecomposition,
    session: Session,
    hand: Hand = Hand.R,
    scheduler: Optional[Scheduler] = None,
    both_entry_points: bool = False,
    listeners=(),
) -> TraversalResult:
    """Greedy-face-greedy routing with FACE-2 recovery.

    Raises:
        StepBudgetExceeded: guards against protocol bugs.
    """
    protocol = GfgProtocol(
        g_full, g_planar, fd, session, hand, both_entry_points
    )
    result = _run(
        g_full, protocol, scheduler,
        default_step_budget(g_planar.edge_count, len(g_planar)), "gfg",
        listeners,
    )
    result.pairs = protocol.transitions
    return result


class DirectoryState(str, Enum):
    """Lifecycle of the direction records of one session."""

    LEARNING = "learning"
    ESTABLISHED = "established"
    CLEARED = "cleared"


class SessionDirectory:
    """Entry point direction records of the sessions in progress.

    The records live in the node runtimes; this object is the view the
    session layer uses to write, inspect and clear them.

    Attributes:
        runtimes: the node runtimes holding the records.
        states: lifecycle of each session (`learning`, `established`,
            `cleared`).
    """

    def __init__(self, runtimes: Dict[NodeId, NodeRuntime]):
        self.runtimes = runtimes
        self.states: Dict[Tuple[NodeId, NodeId], DirectoryState] = {}

    def recorder(self, session: Session):
        """A spawn listener that stores arrival directions."""
        self.states[session.key] = DirectoryState.LEARNING

        def record(node, face, parent, prev, hops):
            node.entry_directions[(session.key, face)] = EntryRecord(
                face=face,
                from_face=parent.face if parent is not None else None,
                arrival_hand=parent.hand if parent is not None else None,
                arrival_from=prev,
                hops=dict(hops),
            )

        return record

    def cleaner(self, session: Session, keep_established: bool):
        """A visit listener that forgets records of `session`."""

        def clean(node: NodeRuntime, token: Optional[Token]) -> None:
            self.forget(node, session, keep_established)

        return clean

    def forget(
        self, node: NodeRuntime, session: Session, keep_established: bool
    ) -> None:
        for key in [k for k in node.entry_directions if k[0] == session.key]:
            if keep_established and node.entry_directions[key].established:
                continue
            del node.entry_directions[key]

    def entries(self, session: Session) -> Dict[Tuple[NodeId, FaceId],
                                                 EntryRecord]:
        return {
            (n, key[1]): record
            for n, node in sorted(self.runtimes.items())
            for key, record in node.entry_directions.items()
            if key[0] == session.key
        }

    def established(self, session: Session) -> Dict[Tuple[NodeId, FaceId],
                                                     EntryRecord]:
        return {
            k: r for k, r in self.entries(session).items() if r.established
        }

    def count(self) -> int:
        return sum(len(n.entry_directions) for n in self.runtimes.values())

    def snapshot(self) -> bytes:
        """A canonical byte image of every node's records."""
        return json.dumps(
            {
                str(n): sorted(
                    [list(k[0]), list(k[1]), r.as_dict()]
                    for k, r in node.entry_directions.items()
                )
                for n, node in sorted(self.runtimes.items())
            },
            sort_keys=True,
        ).encode("utf-8")


@define
class TracebackResult:
    """The traceback run and the preferred path it taught.

    Attributes:
        stats: kernel counters of the traceback message.
        route: nodes visited by the traceback, destination first.
    """

    stats: RunStats
    route: Tuple[NodeId, ...]

    @property
    def preferred_path(self) -> Tuple[NodeId, ...]:
        return tuple(reversed(self.route))

    @property
    def preferred_hops(self) -> int:
        return len(self.route) - 1


class TracebackProtocol:
    """Single message retracing the first delivered token's route."""

    def __init__(self, g: GeometricGraph, session: Session,
                 delivery: Delivery):
        self.g = g
        self.session = session
        self.delivery = delivery

    def seed(self, sim: Simulation) -> None:
        hand = Hand(self.delivery.hand).opposite
        prev, d = self.delivery.arrival_edge
        sim.send(
            d,
            prev,
            Token(
                hand=hand,
                source=self.session.source,
                dest=self.session.dest,
                face=self.delivery.face,
                mode=Mode.TRACEBACK,
                trail=(d,),
            ),
        )

    def on_receive(self, node: NodeRuntime, message: Message,
                   sim: Simulation) -> str:
        token: Token = message.payload
        n = node.id
        trail = token.trail + (n,)
        assert token.hand is not None
        record = node.entry_directions.get((self.session.key, token.face))
        # Only the corner the delivered lineage left through counts.
        if (
            record is not None
            and record.hops[token.hand.opposite] == message.sender
        ):
            record.preferred = token.hand.opposite
            if record.from_face is None:
                # Back at the origin of the first face.
                return _deliver(sim, message, token, trail)
            assert record.arrival_hand is not None
            assert record.arrival_from is not None
            sim.send(
                n,
                record.arrival_from,
                evolve(
                    token,
                    hand=record.arrival_hand.opposite,
                    face=record.from_face,
                    trail=trail,
                ),
            )
            return "switched"
        sim.send(n, next_hop(self.g, n, message.sender, token.hand),
                 evolve(token, trail=trail))
        return "forwarded"


def run_traceback(
    delivery: Delivery,
    directory: SessionDirectory,
    g: GeometricGraph,
    fd: FaceDecomposition,
    session: Session,
    scheduler: Optional[Scheduler] = None,
) -> TracebackResult:
    """Send the traceback from the destination back to the source.

    Every entry point on the way learns the hand that leads to the
    destination; the source learns it for the first face.

    Raises:
        ProtocolError: when the traceback does not reach the source.
    """
    for node in directory.runtimes.values():
        node.reset_run()
    protocol = TracebackProtocol(g, session, delivery)
    sim = Simulation(directory.runtimes, protocol,
                     (scheduler or Scheduler.fifo()).fresh())
    protocol.seed(sim)
    try:
        stats = sim.run_to_quiescence(
            default_step_budget(g.edge_count, 1), label="traceback"
        )
    except ProtocolError as exc:
        raise ProtocolError.from_code(
            "traceback-lost",
            params={"dest": session.dest, "node": "the step budget",
                    "source": session.source},
        ) from exc
    arrival = stats.first_delivery()
    if arrival is None or arrival.path[-1] != session.source:
        raise ProtocolError.from_code(
            "traceback-lost",
            params={
                "dest": session.dest,
                "node": arrival.path[-1] if arrival else session.dest,
                "source": session.source,
            },
        )
    directory.states[session.key] = DirectoryState.ESTABLISHED
    return TracebackResult(stats=stats, route=arrival.path)


class PreferredProtocol:
    """Session messages following the stored preferred directions."""

    def __init__(self, g: GeometricGraph, fd: FaceDecomposition,
                 session: Session, end_of_session: bool):
        self.g = g
        self.fd = fd
        self.session = session
        self.end_of_session = end_of_session

    def seed(self, sim: Simulation) -> None:
        s, d = self.session.key
        node = sim.nodes[s]
        face, _ = first_face(self.g, self.fd, s, d)
        record = node.entry_directions[(self.session.key, face)]
        assert record.preferred is not None
        hand = record.preferred
        if self.end_of_session:
            self._forget(node)
        sim.send(
            s,
            record.hops[hand],
            Token(hand=hand, source=s, dest=d, face=face,
                  mode=Mode.PREFERRED, trail=(s,),
                  end_of_session=self.end_of_session),
        )

    def _forget(self, node: NodeRuntime) -> None:
        for key in [k for k in node.entry_directions
                    if k[0] == self.session.key]:
            del node.entry_directions[key]

    def on_receive(self, node: NodeRuntime, message: Message,
                   sim: Simulation) -> str:
        token: Token = message.payload
        n = node.id
        trail = token.trail + (n,)
        assert token.hand is not None
        switch = None
        for key, record in sorted(node.entry_directions.items()):
            if (
                key[0] == self.session.key
                and record.established
                and record.from_face == token.face
                and record.arrival_from == message.sender
            ):
                switch = record
                break
        if token.end_of_session:
            self._forget(node)
        if n == token.dest:
            return _deliver(sim, message, token, trail)
        if switch is not None:
            assert switch.preferred is not None
            sim.send(
                n,
                switch.hops[switch.preferred],
                evolve(token, hand=switch.preferred, face=switch.face,
                       trail=trail),
            )
            return "switched"
        sim.send(n, next_hop(self.g, n, message.sender, token.hand),
                 evolve(token, trail=trail))
        return "forwarded"


class G2fgProtocol:
    """Greedy forwarding that falls back to 2FACE for good."""

    def __init__(
        self,
        g_full: GeometricGraph,
        g_planar: GeometricGraph,
        fd: FaceDecomposition,
        session: Session,
        directory: Optional[SessionDirectory] = None,
        both_entry_points: bool = False,
    ):
        self.g_full = g_full
        self.g_planar = g_planar
        self.fd = fd
        self.session = session
        self.directory = directory
        self.both_entry_points = both_entry_points
        self.face_protocol: Optional[TwoFaceProtocol] = None
        self.face_session: Optional[Session] = None
        self.greedy_trail: Tuple[NodeId, ...] = ()

    def start_faces(self, sim: Simulation, n: NodeId,
                    trail: Tuple[NodeId, ...]) -> None:
        """Start 2FACE at the local minimum `n`."""
        self.face_session = Session.between(
            self.g_planar, n, self.session.dest
        )
        self.greedy_trail = trail
        self.face_protocol = TwoFaceProtocol(
            TraversalContext(
                g=self.g_planar,
                fd=self.fd,
                session=self.face_session,
                both_entry_points=self.both_entry_points,
            ),
            on_spawn=(
                self.directory.recorder(self.face_session)
                if self.directory is not None
                else None
            ),
        )
        self.face_protocol.seed(sim, origin=n, trail=trail)

    def seed(self, sim: Simulation) -> None:
        s, d = self.session.key
        nxt = greedy_step(s, d, self.g_full)
        if nxt is None:
            self.start_faces(sim, s, (s,))
            return
        sim.send(s, nxt, Token(hand=None, source=s, dest=d, face=None,
                               mode=Mode.GREEDY, trail=(s,)))

    def on_receive(self, node, message: Message, sim: Simulation) -> str:
        token: Token = message.payload
        if token.mode != Mode.GREEDY:
            assert self.face_protocol is not None
            return self.face_protocol.on_receive(node, message, sim)
        n = node.id
        trail = token.trail + (n,)
        if n == token.dest:
            return _deliver(sim, message, token, trail)
        nxt = greedy_step(n, token.dest, self.g_full)
        if nxt is None:
            self.start_faces(sim, n, trail)
            return "switched"
        sim.send(n, nxt, evolve(token, trail=trail))
        return "forwarded"


@define
class G2fgResult(TraversalResult):
    """G2FG outcome; `face_session` is None when greedy delivered."""

    face_session: Optional[Session] = None
    greedy_trail: Tuple[NodeId, ...] = ()


def route_g2fg(
    g_full: GeometricGraph,
    g_planar: GeometricGraph,
    fd: FaceDecomposition,
    session: Session,
    scheduler: Optional[Scheduler] = None,
    directory: Optional[SessionDirectory] = None,
    both_entry_points: bool = False,
    listeners=(),
) -> G2fgResult:
    """Greedy until a local minimum, then 2FACE to the destination."""
    runtimes = directory.runtimes if directory else make_runtimes(g_full)
    for node in runtimes.values():
        node.reset_run()
    protocol = G2fgProtocol(
        g_full, g_planar, fd, session, directory, both_entry_points
    )
    sim = Simulation(runtimes, protocol, scheduler or Scheduler.fifo(),
                     listeners)
    protocol.seed(sim)
    stats = sim.run_to_quiescence(
        default_step_budget(g_planar.edge_count, len(g_planar)), label="g2fg"
    )
    delivery = stats.first_delivery()
    return G2fgResult(
        stats=stats,
        path=delivery.path if delivery else (),
        delivery=delivery,
        runtimes=runtimes,
        pairs=protocol.face_protocol.pairs if protocol.face_protocol else 0,
        face_session=protocol.face_session,
        greedy_trail=protocol.greedy_trail,
    )


@frozen
class SessionMessage:
    """Metrics of one message of a session."""

    index: int
    hops: int
    messages: int
    causal_latency: Optional[int]


@define
class SessionResult:
    """Outcome of a multi-message session.

    Attributes:
        messages: per-message metrics, first message first.
        first: the augmented 2FACE run of the first message.
        traceback: the traceback run.
        cleanup_messages: cost of the clean-up 2FACE message.
        stateless: whether the directories were byte-identical before
            the session and after it.
    """

    messages: List[SessionMessage]
    first: TraversalResult
    traceback: TracebackResult
    cleanup_messages: int
    stateless: bool
    leftover_entries: int = 0

    @property
    def overhead_messages(self) -> int:
        return self.traceback.stats.total_messages + self.cleanup_messages

    @property
    def total_messages(self) -> int:
        return (
            sum(m.messages for m in self.messages) + self.overhead_messages
        )

    @property
    def preferred_hops(self) -> int:
        return self.traceback.preferred_hops


def establish_preferred(
    g_planar: GeometricGraph,
    fd: FaceDecomposition,
    session: Session,
    first: TraversalResult,
    directory: SessionDirectory,
    scheduler: Optional[Scheduler],
    keep_established: bool,
    both_entry_points: bool = False,
) -> Tuple[TracebackResult, int]:
    """Traceback, then the 2FACE clean-up message.

    Returns:
        The traceback and the number of clean-up messages.
    """
    if first.delivery is None:
        raise ProtocolError.from_code(
            "not-delivered",
            params={"algorithm": "2face", "source": session.source,
                    "dest": session.dest},
        )
    traceback = run_traceback(
        first.delivery, directory, g_planar, fd, session, scheduler
    )
    cleanup = route_2face(
        g_planar,
        fd,
        session,
        scheduler=(scheduler or Scheduler.fifo()).fresh(),
        both_entry_points=both_entry_points,
        runtimes=directory.runtimes,
        mode=Mode.CLEANUP,
        on_visit=directory.cleaner(session, keep_established),
    )
    return traceback, cleanup.stats.total_messages


def route_session(
    g_full: GeometricGraph,
    g_planar: GeometricGraph,
    fd: FaceDecomposition,
    session: Session,
    k_messages: int,
    scheduler: Optional[Scheduler] = None,
    both_entry_points: bool = False,
) -> SessionResult:
    """Send `k_messages` messages from source to destination.

    The first message uses augmented 2FACE and is followed by the
    traceback and by a 2FACE clean-up message that makes off-path entry
    points forget. The remaining messages follow the preferred path; the
    last one makes the on-path entry points forget.
    """
    if k_messages < 1:
        raise ConfigError.from_code(
            "invalid-config",
            params={"reason": "a session needs at least one message"},
            field="k_messages",
        )
    scheduler = scheduler or Scheduler.fifo()
    directory = SessionDirectory(make_runtimes(g_planar))
    before = directory.snapshot()

    first = route_2face(
        g_planar,
        fd,
        session,
        scheduler=scheduler.fresh(),
        both_entry_points=both_entry_points,
        runtimes=directory.runtimes,
        on_spawn=directory.recorder(session),
    )
    traceback, cleanup_messages = establish_preferred(
        g_planar, fd, session, first, directory, scheduler,
        keep_established=k_messages > 1,
        both_entry_points=both_entry_points,
    )
    messages = [
        SessionMessage(
            index=1,
            hops=len(first.path) - 1,
            messages=first.stats.total_messages,
            causal_latency=first.stats.delivery_causal_depth,
        )
    ]
    for index in range(2, k_messages + 1):
        result = _run_preferred(
            g_planar, fd, session, directory, index == k_messages
        )
        messages.append(
            SessionMessage(
                index=index,
                hops=len(result.path) - 1,
                messages=result.stats.total_messages,
                causal_latency=result.stats.delivery_causal_depth,
            )
        )
    directory.states[session.key] = DirectoryState.CLEARED
    after = directory.snapshot()
    leftover = directory.count()
    if leftover:
        logger.warning(
            "%d direction entries survived session %s.", leftover,
            session.key,
        )
    return SessionResult(
        messages=messages,
        first=first,
        traceback=traceback,
        cleanup_messages=cleanup_messages,
        stateless=before == after,
        leftover_entries=leftover,
    )


def _run_preferred(
    g: GeometricGraph,
    fd: FaceDecomposition,
    session: Session,
    directory: SessionDirectory,
    end_of_session: bool,
) -> TraversalResult:
    for node in directory.runtimes.values():
        node.reset_run()
    protocol = PreferredProtocol(g, fd, session, end_of_session)
    sim = Simulation(directory.runtimes, protocol, Scheduler.fifo())
    protocol.seed(sim)
    stats = sim.run_to_quiescence(
        default_step_budget(g.edge_count, 1), label="session"
    )
    delivery = stats.first_delivery()
    if delivery is None:
        raise ProtocolError.from_code(
            "not-delivered",
            params={"algorithm": "session", "source": session.source,
                    "dest": session.dest},
        )
    return TraversalResult(stats=stats, path=delivery.path,
                           delivery=delivery, runtimes=directory.runtimes)


@define
class RoutingInstance:
    """The graphs and session one route is computed on.

    Attributes:
        full: the unit-disk graph (greedy modes).
        planar: its Gabriel subgraph (face modes).
        fd: faces of the planar graph.
        session: the source and destination.
    """

    full: GeometricGraph
    planar: GeometricGraph
    fd: FaceDecomposition
    session: Session

    @classmethod
    def build(
        cls,
        g: GeometricGraph,
        source: NodeId,
        dest: NodeId,
        planar: Optional[GeometricGraph] = None,
        fd: Optional[FaceDecomposition] = None,
    ) -> "RoutingInstance":
        if planar is None:
            planar = g if g.planar else gabriel_planarize(g)
        return cls(
            full=g,
            planar=planar,
            fd=fd or decompose_faces(planar),
            session=Session.between(g, source, dest),
        )


@define
class RouteOutcome:
    """Summary of one algorithm on one instance.

    Attributes:
        algorithm: the algorithm identifier.
        delivered: whether the destination was reached.
        path: the route of the first delivered token.
        preferred_path: the preferred path (bi-directional algorithms).
        total_messages: every message the algorithm sent, including the
            traceback and clean-up messages of bi-directional ones.
        causal_latency: causal depth of the first delivery.
        overhead_messages: traceback and clean-up messages.
        stats: kernel counters of the main run.
    """

    algorithm: str
    delivered: bool
    path: Tuple[NodeId, ...] = ()
    preferred_path: Tuple[NodeId, ...] = ()
    total_messages: int = 0
    causal_latency: Optional[int] = None
    overhead_messages: int = 0
    stats: Optional[RunStats] = None
    session: Optional[SessionResult] = None

    @property
    def path_hops(self) -> Optional[int]:
        return len(self.path) - 1 if self.path else None

    @property
    def preferred_hops(self) -> Optional[int]:
        return len(self.preferred_path) - 1 if self.preferred_path else None


def _bidirectional_g2fg(
    instance: RoutingInstance,
    scheduler: Optional[Scheduler],
    both_entry_points: bool,
    listeners=(),
) -> RouteOutcome:
    directory = SessionDirectory(make_runtimes(instance.full))
    result = route_g2fg(
        instance.full, instance.planar, instance.fd, instance.session,
        scheduler=(scheduler or Scheduler.fifo()).fresh(),
        directory=directory, both_entry_points=both_entry_points,
        listeners=listeners,
    )
    outcome = RouteOutcome(
        algorithm="g2fg",
        delivered=result.delivered,
        path=result.path,
        preferred_path=result.path,
        total_messages=result.stats.total_messages,
        causal_latency=result.stats.delivery_causal_depth,
        stats=result.stats,
    )
    if result.face_session is None or result.delivery is None:
        return outcome
    traceback, cleanup = establish_preferred(
        instance.planar, instance.fd, result.face_session, result,
        directory, scheduler, keep_established=False,
        both_entry_points=both_entry_points,
    )
    outcome.preferred_path = (
        result.greedy_trail[:-1] + traceback.preferred_path
    )
    outcome.overhead_messages = traceback.stats.total_messages + cleanup
    outcome.total_messages += outcome.overhead_messages
    return outcome


def run_algorithm(
    algorithm: str,
    instance: RoutingInstance,
    scheduler: Optional[Scheduler] = None,
    hand: Hand = Hand.R,
    both_entry_points: bool = False,
    session_messages: int = 5,
    listeners=(),
) -> RouteOutcome:
    """Run one algorithm and summarise the outcome.

    Raises:
        ConfigError: unknown or reserved algorithm identifier.
        StepBudgetExceeded: livelock (compass) or protocol bug.
    """
    validate_algorithm(algorithm)
    session = instance.session
    result: TraversalResult
    if algorithm == "g2fg":
        return _bidirectional_g2fg(
            instance, scheduler, both_entry_points, listeners
        )
    if algorithm == "session":
        sres = route_session(
            instance.full, instance.planar, instance.fd, session,
            session_messages, scheduler, both_entry_points,
        )
        return RouteOutcome(
            algorithm=algorithm,
            delivered=sres.first.delivered,
            path=sres.first.path,
            preferred_path=sres.traceback.preferred_path,
            total_messages=sres.total_messages,
            causal_latency=sres.first.stats.delivery_causal_depth,
            overhead_messages=sres.overhead_messages,
            stats=sres.first.stats,
            session=sres,
        )
    if algorithm == "2face":
        directory = SessionDirectory(make_runtimes(instance.planar))
        result = route_2face(
            instance.planar, instance.fd, session,
            scheduler=(scheduler or Scheduler.fifo()).fresh(),
            both_entry_points=both_entry_points,
            runtimes=directory.runtimes,
            on_spawn=directory.recorder(session),
            listeners=listeners,
        )
        outcome = RouteOutcome(
            algorithm=algorithm,
            delivered=result.delivered,
            path=result.path,
            total_messages=result.stats.total_messages,
            causal_latency=result.stats.delivery_causal_depth,
            stats=result.stats,
        )
        if result.delivered:
            traceback, cleanup = establish_preferred(
                instance.planar, instance.fd, session, result, directory,
                scheduler, keep_established=False,
                both_entry_points=both_entry_points,
            )
            outcome.preferred_path = traceback.preferred_path
            outcome.overhead_messages = (
                traceback.stats.total_messages + cleanup
            )
            outcome.total_messages += outcome.overhead_messages
        return outcome

    if algorithm == "greedy":
        result = route_greedy(instance.full, session, scheduler, listeners)
    elif algorithm == "compass":
        result = route_compass(instance.full, session, scheduler, listeners)
    elif algorithm == "face1":
        result = route_face1(
            instance.planar, instance.fd, session, hand, scheduler,
            both_entry_points, listeners,
        )
    elif algorithm == "face2":
        result = route_face2(
            instance.planar, instance.fd, session, hand, scheduler,
            both_entry_points, listeners,
        )
    else:
        result = route_gfg(
            instance.full, instance.planar, instance.fd, session, hand,
            scheduler, both_entry_points, listeners,
        )
    return RouteOutcome(
        algorithm=algorithm,
        delivered=result.delivered,
        path=result.path,
        total_messages=result.stats.total_messages,
        causal_latency=result.stats.delivery_causal_depth,
        stats=result.stats,
    )
