import io
import json

import pytest
from attrs import define

from .exceptions import StepBudgetExceeded
from .kernel import (
    Delivery,
    Node,
    RunStats,
    Scheduler,
    Simulation,
    TraceWriter,
    default_step_budget,
)


@define
class Ball:
    hops_left: int
    hand: str = "R"
    face: tuple = (0, 1)


class PingPong:
    """Bounce a ball between nodes 0 and 1 until it runs out of hops."""

    def on_receive(self, node, message, sim):
        ball = message.payload
        if ball.hops_left == 0:
            return "stopped"
        sim.send(
            node.id, message.sender, Ball(hops_left=ball.hops_left - 1)
        )
        return "forwarded"


def make_sim(**kwargs):
    nodes = {n: Node(id=n) for n in range(3)}
    return Simulation(nodes, PingPong(), **kwargs)


def test_scheduler_rejects_unknown_policy():
    with pytest.raises(ValueError):
        Scheduler("lifo")


def test_fifo_picks_oldest_message():
    sim = make_sim()
    sim.send(2, 0, Ball(0))
    sim.send(1, 0, Ball(0))
    sim.send(2, 1, Ball(0))
    ready = [node for node in sim.nodes.values() if node.send_queue]
    assert sim.scheduler.select(ready).id == 2
    event = sim.step()
    assert event.message.seq == 1
    event = sim.step()
    assert event.message.sender == 1


def test_random_scheduler_is_reproducible():
    def run(scheduler):
        sim = make_sim(scheduler=scheduler)
        for sender in (0, 1, 2, 0, 1, 2):
            sim.send(sender, (sender + 1) % 3, Ball(0))
        order = []
        while (event := sim.step()) is not None:
            order.append(event.message.seq)
        return order

    scheduler = Scheduler.random(seed=17)
    first = run(scheduler)
    assert first == run(scheduler.fresh())
    assert sorted(first) == [1, 2, 3, 4, 5, 6]


def test_causal_depth_grows_along_the_chain():
    sim = make_sim()
    sim.send(0, 1, Ball(3))
    depths = []
    while (event := sim.step()) is not None:
        depths.append(event.message.causal_depth)
    assert depths == [1, 2, 3, 4]
    assert sim.stats.total_messages == 4
    assert sim.stats.steps == 4
    assert sim.current_depth == 0


def test_run_to_quiescence():
    sim = make_sim()
    sim.send(0, 1, Ball(5))
    stats = sim.run_to_quiescence(100)
    assert stats.total_messages == 6
    assert all(not node.send_queue for node in sim.nodes.values())


def test_step_budget_exceeded():
    sim = make_sim()
    sim.send(0, 1, Ball(1000))
    with pytest.raises(StepBudgetExceeded) as exc_info:
        sim.run_to_quiescence(10, label="ping")
    assert exc_info.value.code == "step-budget-exceeded"
    assert exc_info.value.data.params == {
        "max_steps": 10,
        "algorithm": "ping",
    }
    assert exc_info.value.stats.steps == 10


def test_step_budget_must_be_positive():
    with pytest.raises(ValueError):
        make_sim().run_to_quiescence(0)


def test_listeners_see_every_step(mocker):
    listener = mocker.Mock()
    sim = make_sim(listeners=[listener])
    sim.send(0, 1, Ball(2))
    sim.run_to_quiescence(10)
    assert listener.call_count == 3
    actions = [call.args[0].action for call in listener.call_args_list]
    assert actions == ["forwarded", "forwarded", "stopped"]


def test_max_wait():
    sim = make_sim()
    sim.send(0, 1, Ball(0))
    sim.send(2, 1, Ball(0))
    sim.run_to_quiescence(10)
    assert sim.stats.max_wait == 2


def test_trace_writer():
    stream = io.StringIO()
    sim = make_sim(listeners=[TraceWriter(stream)])
    sim.send(0, 1, Ball(1))
    sim.run_to_quiescence(10)
    lines = [json.loads(line) for line in stream.getvalue().splitlines()]
    assert lines == [
        {
            "step": 1,
            "from": 0,
            "to": 1,
            "hand": "R",
            "face": [0, 1],
            "causal_depth": 1,
            "annihilated": False,
        },
        {
            "step": 2,
            "from": 1,
            "to": 0,
            "hand": "R",
            "face": [0, 1],
            "causal_depth": 2,
            "annihilated": False,
        },
    ]


def delivery(depth, hand, step):
    return Delivery(
        causal_depth=depth,
        step=step,
        hand=hand,
        face=None,
        arrival_edge=(0, 1),
        path=(0, 1),
    )


def test_first_delivery():
    stats = RunStats()
    assert stats.first_delivery() is None
    assert not stats.delivered
    stats.record_delivery(delivery(5, "R", 3))
    stats.record_delivery(delivery(4, "R", 7))
    stats.record_delivery(delivery(4, "L", 9))
    assert stats.delivery_causal_depth == 4
    first = stats.first_delivery()
    assert (first.hand, first.step) == ("L", 9)


def test_default_step_budget():
    assert default_step_budget(10, 0) == 500
    assert default_step_budget(10, 3) == 2000
    assert default_step_budget(0, 0) == 50
