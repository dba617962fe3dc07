"""Route figures: a plot-ready JSON file and an SVG rendering."""
import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402

from facewalk.exceptions import ConfigError  # noqa: E402
from facewalk.schemas.graph import FigureData, NodeData, PathSpec  # noqa: E402
from facewalk.topology import GeometricGraph  # noqa: E402

logger = logging.getLogger("facewalk.harness")

PATH_COLORS = ("tab:red", "tab:blue", "tab:green", "tab:orange")


def figure_data(
    g: GeometricGraph, paths: Sequence[Tuple[str, Sequence[int]]]
) -> FigureData:
    """Collect what a figure shows.

    Raises:
        ConfigError: a path names a node that is not in `g`.
    """
    specs = []
    for label, nodes in paths:
        for node in nodes:
            if not 0 <= node < len(g):
                raise ConfigError.from_code(
                    "invalid-node",
                    params={"node": node, "size": len(g)},
                    field="paths",
                )
        specs.append(PathSpec(label=label, nodes=list(nodes)))
    return FigureData(
        nodes=[
            NodeData(id=n, x=g.position(n).x, y=g.position(n).y)
            for n in g.nodes
        ],
        edges=[tuple(e) for e in g.edges],
        paths=specs,
    )


def render_svg(data: FigureData, svg_path: Path) -> None:
    """Draw nodes, edges and highlighted paths."""
    xy = {node.id: (node.x, node.y) for node in data.nodes}
    fig, ax = plt.subplots(figsize=(8, 8))
    try:
        ax.add_collection(
            LineCollection(
                [(xy[a], xy[b]) for a, b in data.edges],
                colors="lightgray",
                linewidths=0.8,
                zorder=1,
            )
        )
        for index, path in enumerate(data.paths):
            ax.plot(
                [xy[n][0] for n in path.nodes],
                [xy[n][1] for n in path.nodes],
                color=PATH_COLORS[index % len(PATH_COLORS)],
                linewidth=2.0,
                label=f"{path.label} ({max(len(path.nodes) - 1, 0)} hops)",
                zorder=2,
            )
        ax.scatter(
            [p[0] for p in xy.values()],
            [p[1] for p in xy.values()],
            s=12,
            color="black",
            zorder=3,
        )
        ax.set_aspect("equal", adjustable="box")
        ax.autoscale()
        if data.paths:
            ax.legend(loc="upper right")
        fig.tight_layout()
        # No date and a fixed id salt: same figure, same bytes.
        with plt.rc_context({"svg.hashsalt": "facewalk"}):
            fig.savefig(svg_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)


def emit_route_figure(
    g: GeometricGraph,
    paths: Sequence[Tuple[str, Sequence[int]]],
    json_path: Path,
    svg_path: Optional[Path] = None,
) -> FigureData:
    """Write the figure data and, optionally, its SVG rendering.

    Raises:
        ConfigError: invalid node reference or unwritable file.
    """
    data = figure_data(g, paths)
    try:
        Path(json_path).write_text(
            data.model_dump_json(indent=2) + "\n", encoding="utf-8"
        )
        if svg_path is not None:
            render_svg(data, Path(svg_path))
    except OSError as exc:
        raise ConfigError.from_code(
            "io-error",
            params={"path": exc.filename or json_path,
                    "reason": exc.strerror},
        ) from exc
    logger.info("Wrote figure with %d paths to %s.", len(paths), json_path)
    return data
