"""Density sweeps over random unit-disk graphs."""
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from statistics import fmean
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from attrs import define, field

from facewalk.exceptions import (
    GenerationExhausted,
    ProtocolError,
    StepBudgetExceeded,
)
from facewalk.kernel import Scheduler
from facewalk.routing import (
    RouteOutcome,
    RoutingInstance,
    run_algorithm,
    validate_algorithm,
)
from facewalk.schemas.experiment import (
    AggregateRow,
    DiscardedCell,
    ExperimentConfig,
    RouteMetrics,
)
from facewalk.topology import (
    GeometricGraph,
    decompose_faces,
    gabriel_planarize,
    generate_unit_disk,
    sample_pairs,
    shortest_path_hops,
)
from facewalk.traversal import Hand, Session, verify_accounting

logger = logging.getLogger("facewalk.harness")

# Single direction algorithm each bi-directional one is compared to.
BASELINES = {"2face": "face2", "session": "face2", "g2fg": "gfg"}

# Algorithms whose route uses edges of the full unit-disk graph.
FULL_GRAPH_ALGORITHMS = ("greedy", "compass", "gfg", "g2fg")

# Extra seed word separating pair sampling from graph generation.
PAIR_STREAM = 1
SCHEDULER_STREAM = 2


def break_even(
    messages_bi: int,
    messages_single: int,
    hops_single: int,
    hops_preferred: int,
) -> Optional[int]:
    """The session length from which bi-directional routing is cheaper.

    Returns:
        The smallest k >= 1 with
        messages_bi + (k - 1) * hops_preferred
        <= messages_single + (k - 1) * hops_single,
        or None when the preferred path is not shorter.
    """
    if min(messages_bi, messages_single, hops_single, hops_preferred) < 0:
        raise ValueError("Break-even inputs must be non-negative.")
    if hops_preferred >= hops_single:
        return None
    overhead = messages_bi - messages_single
    if overhead <= 0:
        return 1
    saving = hops_single - hops_preferred
    return 1 + -(-overhead // saving)


def cell_seed(config: ExperimentConfig, n: int, u: float, *words) -> int:
    """Derive a reproducible seed for one run inside a cell."""
    sequence = np.random.SeedSequence(
        [config.master_seed, n, int(round(u * 1000)), *words]
    )
    return int(sequence.generate_state(1)[0])


@define
class GeneratedGraph:
    """A connected graph of a cell and the seed stream it came from."""

    index: int
    attempt: int
    full: GeometricGraph


@define
class CellResult:
    """Rows of one (n, u) cell, or the reason it was discarded."""

    n: int
    u: float
    metrics: List[RouteMetrics] = field(factory=list)
    discarded: Optional[DiscardedCell] = None


@define
class ExperimentResult:
    """Everything an experiment produced.

    Attributes:
        metrics: one row per (graph, pair, algorithm), ordered.
        aggregates: one row per (n, u, algorithm).
        discarded: cells skipped because generation was exhausted.
    """

    metrics: List[RouteMetrics] = field(factory=list)
    aggregates: List[AggregateRow] = field(factory=list)
    discarded: List[DiscardedCell] = field(factory=list)


def generate_cell(
    config: ExperimentConfig, n: int, u: float
) -> List[GeneratedGraph]:
    """Generate the connected graphs of a cell.

    Raises:
        GenerationExhausted: more than `attempt_limit` graphs were
            rejected in this cell.
    """
    graphs = []
    rejected = 0
    for index in range(config.graphs_per_density):
        attempt = 0
        while True:
            g = generate_unit_disk(
                n,
                config.area_side,
                u,
                seed=cell_seed(config, n, u, index, attempt),
            )
            if g is not None:
                graphs.append(GeneratedGraph(index, attempt, g))
                break
            rejected += 1
            attempt += 1
            if rejected > config.attempt_limit:
                raise GenerationExhausted.from_code(
                    "generation-exhausted",
                    params={"n": n, "u": u, "attempts": rejected},
                )
    return graphs


def route_metrics(
    algorithm: str,
    instance: RoutingInstance,
    config: ExperimentConfig,
    scheduler: Scheduler,
) -> RouteOutcome:
    """Run one algorithm, turning expected failures into rows.

    Greedy stops at local minima and compass may livelock; both are
    reported as undelivered. Every other failure is a protocol error.
    """
    try:
        outcome = run_algorithm(
            algorithm,
            instance,
            scheduler=scheduler,
            hand=Hand(config.hand),
            both_entry_points=config.both_entry_points,
            session_messages=config.session_messages,
        )
    except StepBudgetExceeded as exc:
        if algorithm != "compass":
            raise
        stats = exc.stats
        return RouteOutcome(
            algorithm=algorithm,
            delivered=False,
            total_messages=stats.total_messages if stats else 0,
        )
    # Two designees per crossing may send two pairs around one face.
    if (
        algorithm in ("2face", "session")
        and outcome.stats is not None
        and not config.both_entry_points
    ):
        verify_accounting(outcome.stats)
    if outcome.session is not None and not outcome.session.stateless:
        raise ProtocolError.from_code(
            "directory-not-empty",
            params={"count": outcome.session.leftover_entries},
        )
    if not outcome.delivered and algorithm not in ("greedy", "compass"):
        raise ProtocolError.from_code(
            "not-delivered",
            params={
                "algorithm": algorithm,
                "source": instance.session.source,
                "dest": instance.session.dest,
            },
        )
    return outcome


def run_cell(config: ExperimentConfig, n: int, u: float) -> CellResult:
    """Generate the graphs of one cell and route every pair on them."""
    result = CellResult(n=n, u=u)
    try:
        graphs = generate_cell(config, n, u)
    except GenerationExhausted as exc:
        logger.warning("Discarding cell n=%d u=%s: %s", n, u, exc.message)
        result.discarded = DiscardedCell(
            n=n, u=u, rejected=config.attempt_limit + 1
        )
        return result

    for gen in graphs:
        planar = gabriel_planarize(gen.full)
        fd = decompose_faces(planar)
        rng = np.random.default_rng(
            cell_seed(config, n, u, gen.index, gen.attempt, PAIR_STREAM)
        )
        graph_id = f"n{n}-u{u:g}-g{gen.index}"
        for pair_id, (s, d) in enumerate(
            sample_pairs(planar, config.pairs_per_graph, rng)
        ):
            instance = RoutingInstance(
                full=gen.full,
                planar=planar,
                fd=fd,
                session=Session.between(gen.full, s, d),
            )
            shortest_planar = shortest_path_hops(planar, s, d)
            shortest_full = shortest_path_hops(gen.full, s, d)
            for alg_index, algorithm in enumerate(config.algorithms):
                if config.scheduler == "random":
                    scheduler = Scheduler.random(
                        cell_seed(
                            config, n, u, gen.index, pair_id, alg_index,
                            SCHEDULER_STREAM,
                        )
                    )
                else:
                    scheduler = Scheduler.fifo()
                outcome = route_metrics(algorithm, instance, config, scheduler)
                result.metrics.append(
                    RouteMetrics(
                        graph_id=graph_id,
                        n=n,
                        u=u,
                        pair_id=pair_id,
                        src=s,
                        dst=d,
                        algorithm=algorithm,
                        delivered=outcome.delivered,
                        path_hops=outcome.path_hops,
                        preferred_hops=outcome.preferred_hops,
                        total_messages=outcome.total_messages,
                        causal_latency=outcome.causal_latency,
                        shortest_planar_hops=shortest_planar,
                        shortest_full_hops=shortest_full,
                    )
                )
    logger.info(
        "Cell n=%d u=%s: %d graphs, %d rows.",
        n, u, len(graphs), len(result.metrics),
    )
    return result


def _run_cell_args(args: Tuple[ExperimentConfig, int, float]) -> CellResult:
    return run_cell(*args)


def run_experiment(
    config: ExperimentConfig, workers: Optional[int] = None
) -> ExperimentResult:
    """Run every configured algorithm on every pair of every cell.

    Cells run in worker processes when more than one worker is asked
    for. Results are assembled by cell key, so the output does not
    depend on completion order.

    Raises:
        ConfigError: an algorithm identifier is unknown or reserved.
        ProtocolError: a protocol assertion failed on some run.
    """
    for algorithm in config.algorithms:
        validate_algorithm(algorithm)
    workers = workers or config.workers
    cells = [(config, n, u) for n in config.node_counts
             for u in config.u_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cell_results = list(pool.map(_run_cell_args, cells))
    else:
        cell_results = [_run_cell_args(cell) for cell in cells]

    cell_results.sort(key=lambda c: (c.n, c.u))
    result = ExperimentResult()
    for cell in cell_results:
        if cell.discarded is not None:
            result.discarded.append(cell.discarded)
        result.metrics.extend(cell.metrics)
    result.aggregates = aggregate(
        result.metrics, config.algorithms, config.session_messages
    )
    return result


def _mean(values: Sequence[float]) -> Optional[float]:
    return fmean(values) if values else None


def routed_shortest(row: RouteMetrics) -> int:
    """Shortest hops on the graph the row's algorithm routes on."""
    if row.algorithm in FULL_GRAPH_ALGORITHMS:
        return row.shortest_full_hops
    return row.shortest_planar_hops


def aggregate(
    metrics: Sequence[RouteMetrics],
    algorithms: Sequence[str],
    session_messages: int = 5,
) -> List[AggregateRow]:
    """Summarise rows per (n, u, algorithm).

    Bi-directional rows are compared to their baseline on the same
    (graph, pair). The session row's message overhead is its cumulative
    cost minus `session_messages` baseline messages.
    """
    cells: Dict[Tuple[int, float], Dict[str, List[RouteMetrics]]] = (
        defaultdict(lambda: defaultdict(list))
    )
    for row in metrics:
        cells[(row.n, row.u)][row.algorithm].append(row)

    rows = []
    for (n, u), by_alg in sorted(cells.items()):
        for algorithm in algorithms:
            alg_rows = by_alg.get(algorithm, [])
            if not alg_rows:
                continue
            delivered = [r for r in alg_rows if r.delivered]
            agg = AggregateRow(
                n=n,
                u=u,
                algorithm=algorithm,
                runs=len(alg_rows),
                delivery_rate=len(delivered) / len(alg_rows),
                mean_path_hops=_mean([r.path_hops for r in delivered]),
                mean_preferred_hops=_mean(
                    [r.preferred_hops for r in delivered
                     if r.preferred_hops is not None]
                ),
                mean_total_messages=fmean(
                    [r.total_messages for r in alg_rows]
                ),
                mean_causal_latency=_mean(
                    [r.causal_latency for r in delivered]
                ),
                near_optimality=_mean(
                    [
                        (r.preferred_hops or r.path_hops) / routed_shortest(r)
                        for r in delivered
                    ]
                ),
            )
            baseline = BASELINES.get(algorithm)
            if baseline in by_alg:
                _compare(
                    agg, alg_rows, by_alg[baseline], baseline,
                    session_messages if algorithm == "session" else None,
                )
            rows.append(agg)
    return rows


def _compare(
    agg: AggregateRow,
    rows: Sequence[RouteMetrics],
    baseline_rows: Sequence[RouteMetrics],
    baseline: str,
    session_messages: Optional[int],
) -> None:
    by_pair = {(r.graph_id, r.pair_id): r for r in baseline_rows}
    matched = [
        (r, by_pair[(r.graph_id, r.pair_id)])
        for r in rows
        if (r.graph_id, r.pair_id) in by_pair
        and r.delivered
        and r.preferred_hops
        and by_pair[(r.graph_id, r.pair_id)].delivered
    ]
    agg.baseline = baseline
    if not matched:
        return
    single = fmean([b.path_hops for _, b in matched])
    preferred = fmean([r.preferred_hops for r, _ in matched])
    agg.improvement = (single - preferred) / preferred
    agg.hop_ratio = fmean([b.path_hops / r.preferred_hops for r, b in matched])
    if session_messages is None:
        agg.message_overhead = fmean(
            [r.total_messages - b.total_messages for r, b in matched]
        )
        ks = [
            k
            for k in (
                break_even(
                    r.total_messages,
                    b.total_messages,
                    b.path_hops,
                    r.preferred_hops,
                )
                for r, b in matched
            )
            if k is not None
        ]
        agg.break_even_k = _mean(ks)
    else:
        agg.message_overhead = fmean(
            [
                r.total_messages - session_messages * b.total_messages
                for r, b in matched
            ]
        )
