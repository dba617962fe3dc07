"""Command line entry point.

Sub-commands:

- `gen`: generate a connected unit-disk graph;
- `route`: route one pair with one algorithm;
- `experiment`: run a preset sweep and write the result files;
- `trace`: draw highlighted routes over a graph.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple
from uuid import uuid4

import numpy as np
from log2me import setup_logging
from pydantic import TypeAdapter, ValidationError

from facewalk.exceptions import ConfigError, FacewalkError
from facewalk.harness import emit_results, emit_route_figure, run_experiment
from facewalk.kernel import Scheduler, TraceWriter
from facewalk.routing import (
    ALGORITHMS,
    RoutingInstance,
    run_algorithm,
    validate_algorithm,
)
from facewalk.schemas.experiment import RouteReport
from facewalk.schemas.graph import PathSpec
from facewalk.settings import Settings
from facewalk.topology import generate_unit_disk, load_graph, save_graph
from facewalk.traversal import Hand

logger = logging.getLogger("facewalk")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facewalk",
        description="Face routing on planarized unit-disk graphs.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a connected graph")
    gen.add_argument("--n", type=int, required=True, help="node count")
    gen.add_argument(
        "--u", type=float, required=True, help="connectivity radius"
    )
    gen.add_argument("--area", type=float, default=2.0, help="area side")
    gen.add_argument("--seed", type=int, default=None, help="master seed")
    gen.add_argument("--out", type=Path, required=True, help="graph file")

    route = sub.add_parser("route", help="route one pair")
    route.add_argument("--graph", type=Path, required=True)
    route.add_argument(
        "--alg",
        required=True,
        help=f"one of {', '.join(ALGORITHMS)}",
    )
    route.add_argument("--src", type=int, required=True)
    route.add_argument("--dst", type=int, required=True)
    route.add_argument("--trace", type=Path, default=None,
                       help="write the executed steps as JSON Lines")
    route.add_argument("--hand", choices=("L", "R"), default=None)
    route.add_argument("--scheduler", choices=("fifo", "random"),
                       default="fifo")
    route.add_argument("--scheduler-seed", type=int, default=0)
    route.add_argument("--messages", type=int, default=5,
                       help="messages of a `session` run")
    route.add_argument("--both-entry-points", action="store_true",
                       default=None)

    experiment = sub.add_parser("experiment", help="run a preset sweep")
    experiment.add_argument("--preset", default="desk",
                            help="name of a configured preset")
    experiment.add_argument("--seed", type=int, default=None,
                            help="master seed")
    experiment.add_argument("--out", type=Path, required=True,
                            help="output directory")
    experiment.add_argument("--workers", type=int, default=None)
    experiment.add_argument("--format", choices=("csv", "json"),
                            default=None)

    trace = sub.add_parser("trace", help="draw routes over a graph")
    trace.add_argument("--graph", type=Path, required=True)
    trace.add_argument(
        "--paths", type=Path, default=None,
        help="JSON list of {label, nodes}; GFG and G2FG routes otherwise",
    )
    trace.add_argument("--src", type=int, default=None)
    trace.add_argument("--dst", type=int, default=None)
    trace.add_argument("--svg", type=Path, default=None)
    trace.add_argument("--json", type=Path, default=None)
    return parser


def cmd_gen(args, settings: Settings) -> int:
    master = args.seed if args.seed is not None else (
        settings.experiment.master_seed
    )
    for attempt in range(settings.experiment.attempt_limit + 1):
        seed = int(
            np.random.SeedSequence([master, attempt]).generate_state(1)[0]
        )
        g = generate_unit_disk(args.n, args.area, args.u, seed=seed)
        if g is not None:
            save_graph(g, args.out)
            logger.info(
                "Wrote %d nodes and %d edges to %s (attempt %d).",
                len(g), g.edge_count, args.out, attempt,
            )
            return 0
    raise ConfigError.from_code(
        "generation-exhausted",
        params={"n": args.n, "u": args.u,
                "attempts": settings.experiment.attempt_limit + 1},
    )


def cmd_route(args, settings: Settings) -> int:
    validate_algorithm(args.alg)
    g = load_graph(args.graph)
    instance = RoutingInstance.build(g, args.src, args.dst)
    ex = settings.experiment
    scheduler = (
        Scheduler.random(args.scheduler_seed)
        if args.scheduler == "random"
        else Scheduler.fifo()
    )
    both = (
        ex.both_entry_points
        if args.both_entry_points is None
        else args.both_entry_points
    )
    listeners = []
    stream = None
    try:
        if args.trace is not None:
            stream = args.trace.open("w", encoding="utf-8")
            listeners.append(TraceWriter(stream))
        outcome = run_algorithm(
            args.alg,
            instance,
            scheduler=scheduler,
            hand=Hand(args.hand or ex.hand),
            both_entry_points=both,
            session_messages=args.messages,
            listeners=listeners,
        )
    except OSError as exc:
        raise ConfigError.from_code(
            "io-error", params={"path": args.trace, "reason": exc.strerror}
        ) from exc
    finally:
        if stream is not None:
            stream.close()
    report = RouteReport(
        algorithm=args.alg,
        src=args.src,
        dst=args.dst,
        delivered=outcome.delivered,
        path=list(outcome.path),
        preferred_path=list(outcome.preferred_path),
        path_hops=outcome.path_hops,
        preferred_hops=outcome.preferred_hops,
        total_messages=outcome.total_messages,
        overhead_messages=outcome.overhead_messages,
        causal_latency=outcome.causal_latency,
    )
    print(report.model_dump_json(indent=2))
    return 0


def cmd_experiment(args, settings: Settings) -> int:
    try:
        config = settings.preset(args.preset)
    except KeyError:
        raise ConfigError.from_code(
            "invalid-config",
            params={
                "reason": f"unknown preset `{args.preset}`; known: "
                + ", ".join(sorted(settings.presets))
            },
            field="preset",
        )
    update = {}
    if args.seed is not None:
        update["master_seed"] = args.seed
    if args.workers is not None:
        update["workers"] = args.workers
    config = config.model_copy(update=update)
    result = run_experiment(config)
    emit_results(
        result.metrics,
        args.out,
        fmt=args.format or settings.experiment.output_format,
        aggregates=result.aggregates,
        discarded=result.discarded,
        config=config,
    )
    return 0


def gfg_vs_g2fg(
    instance: RoutingInstance,
) -> List[Tuple[str, Sequence[int]]]:
    gfg = run_algorithm("gfg", instance)
    g2fg = run_algorithm("g2fg", instance)
    return [
        ("GFG", gfg.path),
        ("G2FG", g2fg.preferred_path or g2fg.path),
    ]


def cmd_trace(args, settings: Settings) -> int:
    g = load_graph(args.graph)
    if args.paths is not None:
        try:
            specs = TypeAdapter(List[PathSpec]).validate_json(
                args.paths.read_text(encoding="utf-8")
            )
        except (OSError, ValidationError) as exc:
            raise ConfigError.from_code(
                "invalid-config",
                params={"reason": f"cannot read paths: {exc}"},
                field="paths",
            ) from exc
        paths = [(s.label, s.nodes) for s in specs]
    elif args.src is not None and args.dst is not None:
        paths = gfg_vs_g2fg(RoutingInstance.build(g, args.src, args.dst))
    else:
        raise ConfigError.from_code(
            "invalid-config",
            params={"reason": "give --paths or both --src and --dst"},
        )
    json_path = args.json or (
        args.svg.with_suffix(".json") if args.svg else Path("figure.json")
    )
    emit_route_figure(g, paths, json_path, args.svg)
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "route": cmd_route,
    "experiment": cmd_experiment,
    "trace": cmd_trace,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run a command and return the process exit status."""
    args = build_parser().parse_args(argv)
    try:
        settings = Settings()
    except ValidationError as exc:
        print(
            ConfigError.from_code(
                "invalid-config", params={"reason": str(exc)}
            ).to_json(),
            file=sys.stderr,
        )
        return ConfigError.exit_code
    setup_logging(settings.log)

    try:
        return COMMANDS[args.command](args, settings)
    except FacewalkError as exc:
        logger.error("%s", exc.message)
        print(exc.to_json(), file=sys.stderr)
        return exc.exit_code
    except Exception:
        unique_id = str(uuid4())
        logger.exception("Unhandled error (trace id: %s)", unique_id)
        print(
            f"Unhandled error; see the log (trace id: {unique_id}).",
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
