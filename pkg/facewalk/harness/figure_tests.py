import json

import pytest

from facewalk.exceptions import ConfigError
from facewalk.routing import RoutingInstance, run_algorithm

from .figure import emit_route_figure, figure_data


def test_graph_only_figure(square):
    data = figure_data(square.g, [])
    assert len(data.nodes) == 4
    assert len(data.edges) == 4
    assert data.paths == []


def test_single_edge_path(square):
    data = figure_data(square.g, [("hop", [0, 1])])
    assert data.paths[0].nodes == [0, 1]


def test_invalid_node_in_path(square):
    with pytest.raises(ConfigError) as exc_info:
        figure_data(square.g, [("bad", [0, 9])])
    assert exc_info.value.code == "invalid-node"


def test_gfg_and_g2fg_diverge_on_void(void, tmp_path):
    instance = RoutingInstance.build(void.g, void["s"], void["d"])
    paths = [
        (alg, run_algorithm(alg, instance).path) for alg in ("gfg", "g2fg")
    ]
    assert paths[0][1] != paths[1][1]
    json_path = tmp_path / "route.json"
    svg_path = tmp_path / "route.svg"
    data = emit_route_figure(void.g, paths, json_path, svg_path)
    stored = json.loads(json_path.read_text())
    assert [p["label"] for p in stored["paths"]] == ["gfg", "g2fg"]
    assert stored["paths"][0]["nodes"] == list(paths[0][1])
    assert len(data.paths) == 2
    svg = svg_path.read_text()
    assert svg.lstrip().startswith("<?xml")
    assert "<svg" in svg


def test_svg_is_reproducible(diamond, tmp_path):
    for name in ("a", "b"):
        emit_route_figure(
            diamond.g,
            [("2face", [0, 1, 3])],
            tmp_path / f"{name}.json",
            tmp_path / f"{name}.svg",
        )
    assert (tmp_path / "a.svg").read_bytes() == (
        tmp_path / "b.svg"
    ).read_bytes()


def test_figure_unwritable(square, tmp_path):
    with pytest.raises(ConfigError) as exc_info:
        emit_route_figure(square.g, [], tmp_path / "missing" / "f.json")
    assert exc_info.value.code == "io-error"
