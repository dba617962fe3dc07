"""Asynchronous execution engine.

Every node owns a send queue. A step picks one node with a non-empty
queue, removes the message at the head of that queue and runs the
receiver's handler, all as one indivisible action. Channels have no
capacity: nothing is ever in flight between two steps, so two tokens
travelling towards each other over the same edge always meet at a node.
"""
import logging
from collections import Counter
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    List,
    Literal,
    Optional,
    Protocol,
    TextIO,
)

import numpy as np
from attrs import define, field, frozen
from pydantic import BaseModel, ConfigDict, Field

from facewalk.exceptions import StepBudgetExceeded

logger = logging.getLogger("facewalk.kernel")

SchedulerPolicy = Literal["fifo", "random"]


@define
class Message:
    """A queued message.

    Attributes:
        sender: the node owning the queue the message sits in.
        receiver: the neighbour the message will be delivered to.
        payload: the protocol token.
        causal_depth: the length of the causal chain ending with this
            message; a message sent while handling a message of depth k
            has depth k + 1.
        seq: global enqueue order.
        queued_at: the step count when the message was queued.
    """

    sender: int
    receiver: int
    payload: Any
    causal_depth: int
    seq: int
    queued_at: int


@define
class Node:
    """Per-node state owned by the kernel.

    Attributes:
        id: the node identifier.
        send_queue: pending outgoing messages, oldest first.
    """

    id: int
    send_queue: List[Message] = field(factory=list)

    def queued(self) -> List[Any]:
        """The payloads waiting in the send queue."""
        return [m.payload for m in self.send_queue]


@frozen
class Event:
    """One executed step.

    Attributes:
        step: the step number (starting with 1).
        message: the message that was delivered.
        action: what the receiver did with it.
    """

    step: int
    message: Message
    action: str

    @property
    def annihilated(self) -> bool:
        return self.action == "annihilated"


@define
class Delivery:
    """A token that reached its destination."""

    causal_depth: int
    step: int
    hand: Optional[str]
    face: Optional[tuple]
    arrival_edge: tuple
    path: tuple
    payload: Any = None


@define
class RunStats:
    """Counters collected while running one computation.

    Attributes:
        total_messages: the number of delivered messages (one per step).
        steps: executed steps.
        delivery_causal_depth: causal depth of the earliest (by depth)
            delivery to the destination, None when nothing was delivered.
        deliveries: every delivery, in step order.
        spawns: spawned tokens per hand.
        annihilations: annihilated pairs.
        face_forwards: forwarded tokens per face.
        face_annihilations: annihilated pairs per face.
        max_wait: the longest time, in steps, a message waited in a queue.
        violations: (node, hand, face) of every corner handled twice
            (empty on a correct run).
    """

    total_messages: int = 0
    steps: int = 0
    delivery_causal_depth: Optional[int] = None
    deliveries: List[Delivery] = field(factory=list)
    spawns: Counter = field(factory=Counter)
    annihilations: int = 0
    face_forwards: Counter = field(factory=Counter)
    face_annihilations: Counter = field(factory=Counter)
    max_wait: int = 0
    violations: List[tuple] = field(factory=list)

    def record_delivery(self, delivery: Delivery) -> None:
        self.deliveries.append(delivery)
        if (
            self.delivery_causal_depth is None
            or delivery.causal_depth < self.delivery_causal_depth
        ):
            self.delivery_causal_depth = delivery.causal_depth

    @property
    def delivered(self) -> bool:
        return bool(self.deliveries)

    def first_delivery(self) -> Optional[Delivery]:
        """The delivery with the smallest causal depth.

        Ties go to the left hand, then to the earlier step.
        """
        if not self.deliveries:
            return None
        return min(
            self.deliveries,
            key=lambda d: (d.causal_depth, d.hand != "L", d.step),
        )


class Handler(Protocol):
    def on_receive(self, node: Any, message: Message, sim: "Simulation"):
        """Handle one message; return a short action label."""


class Scheduler:
    """Chooses which node sends next.

    Attributes:
        policy: `fifo` sends the oldest queued message overall; `random`
            picks a node with a non-empty queue uniformly at random.
        seed: the seed of the random policy.
    """

    def __init__(self, policy: SchedulerPolicy = "fifo", seed: int = 0):
        if policy not in ("fifo", "random"):
            raise ValueError(f"Unknown scheduler policy: {policy}")
        self.policy = policy
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    @classmethod
    def fifo(cls) -> "Scheduler":
        return cls("fifo")

    @classmethod
    def random(cls, seed: int) -> "Scheduler":
        return cls("random", seed)

    def fresh(self) -> "Scheduler":
        """A scheduler with the same policy and seed, reset."""
        return Scheduler(self.policy, self.seed)

    def select(self, ready: List[Node]) -> Node:
        if self.policy == "fifo":
            return min(ready, key=lambda n: n.send_queue[0].seq)
        return ready[int(self.rng.integers(len(ready)))]


class TraceEvent(BaseModel):
    """One line of the JSON Lines event trace."""

    model_config = ConfigDict(populate_by_name=True)

    step: int
    from_: int = Field(..., alias="from")
    to: int
    hand: Optional[str] = None
    face: Optional[List[int]] = None
    causal_depth: int
    annihilated: bool


class TraceWriter:
    """Write executed steps as JSON Lines.

    Args:
        stream: an open text stream.
    """

    def __init__(self, stream: TextIO):
        self.stream = stream

    def __call__(self, event: Event) -> None:
        payload = event.message.payload
        face = getattr(payload, "face", None)
        line = TraceEvent(
            step=event.step,
            from_=event.message.sender,
            to=event.message.receiver,
            hand=getattr(payload, "hand", None),
            face=list(face) if face is not None else None,
            causal_depth=event.message.causal_depth,
            annihilated=event.annihilated,
        )
        self.stream.write(line.model_dump_json(by_alias=True) + "\n")


class Simulation:
    """Run a protocol over a set of nodes.

    Args:
        nodes: the node runtimes, by identifier.
        handler: the protocol invoked for every delivered message.
        scheduler: the scheduling policy.
        listeners: callables notified after every step.
    """

    def __init__(
        self,
        nodes: Dict[int, Node],
        handler: Handler,
        scheduler: Optional[Scheduler] = None,
        listeners: Iterable[Callable[[Event], None]] = (),
    ):
        self.nodes = nodes
        self.handler = handler
        self.scheduler = scheduler or Scheduler.fifo()
        self.listeners = list(listeners)
        self.stats = RunStats()
        self._seq = 0
        self._depth = 0

    @property
    def current_depth(self) -> int:
        """Causal depth of the message being handled (0 outside steps)."""
        return self._depth

    def send(self, sender: int, receiver: int, payload: Any) -> Message:
        """Append a message to the send queue of `sender`."""
        self._seq += 1
        message = Message(
            sender=sender,
            receiver=receiver,
            payload=payload,
            causal_depth=self._depth + 1,
            seq=self._seq,
            queued_at=self.stats.steps,
        )
        self.nodes[sender].send_queue.append(message)
        return message

    def step(self) -> Optional[Event]:
        """Execute one atomic step; None means quiescent."""
        ready = [node for node in self.nodes.values() if node.send_queue]
        if not ready:
            return None
        sender = self.scheduler.select(ready)
        message = sender.send_queue.pop(0)
        self.stats.steps += 1
        self.stats.total_messages += 1
        self.stats.max_wait = max(
            self.stats.max_wait, self.stats.steps - message.queued_at
        )
        self._depth = message.causal_depth
        try:
            action = self.handler.on_receive(
                self.nodes[message.receiver], message, self
            )
        finally:
            self._depth = 0
        event = Event(
            step=self.stats.steps, message=message, action=action or ""
        )
        for listener in self.listeners:
            listener(event)
        return event

    def run_to_quiescence(
        self, max_steps: int, label: str = "run"
    ) -> RunStats:
        """Step until every send queue is empty.

        Raises:
            StepBudgetExceeded: when `max_steps` steps did not suffice.
        """
        if max_steps <= 0:
            raise ValueError("The step budget must be positive.")
        while self.step() is not None:
            if self.stats.steps >= max_steps and any(
                node.send_queue for node in self.nodes.values()
            ):
                logger.debug(
                    "%s exceeded %d steps; possible livelock.",
                    label,
                    max_steps,
                )
                raise StepBudgetExceeded.from_code(
                    "step-budget-exceeded",
                    params={"max_steps": max_steps, "algorithm": label},
                    stats=self.stats,
                )
        return self.stats


def default_step_budget(edge_count: int, pairs: int) -> int:
    """Safety valve: 50 * |E| * (spawned pairs + 1)."""
    return 50 * max(edge_count, 1) * (pairs + 1)
