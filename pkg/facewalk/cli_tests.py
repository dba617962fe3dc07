import importlib
import json
import os.path

import pytest

from .exceptions import ProtocolError
from .topology import load_graph, save_graph

TINY_PRESET = (
    "presets:\n"
    "  tiny:\n"
    "    node_counts: [14]\n"
    "    u_values: [0.9]\n"
    "    graphs_per_density: 2\n"
    "    pairs_per_graph: 2\n"
    "    algorithms: [face2, 2face, gfg, g2fg]\n"
)


@pytest.fixture
def run_cli(tmp_path, monkeypatch, log_dir):
    """Run the command line with a config file written for the test.

    The settings module picks the config file when it is imported, so it
    is reloaded and handed to the command line module.
    """

    def runner(*argv, config: str = ""):
        cfg_file = os.path.join(tmp_path, "cli.yaml")
        with open(cfg_file, "w") as f:
            f.write("log:\n  console_level: 30\n" + config)
        monkeypatch.setenv("FACEWALK_CONFIG", cfg_file)
        from . import cli, settings

        monkeypatch.setattr(
            cli, "Settings", importlib.reload(settings).Settings
        )
        return cli.main([str(a) for a in argv])

    return runner


def test_gen_writes_connected_graph(run_cli, tmp_path):
    out = tmp_path / "g.json"
    code = run_cli("gen", "--n", 20, "--u", 0.8, "--seed", 4, "--out", out)
    assert code == 0
    g = load_graph(out)
    assert len(g) == 20
    assert g.is_connected()
    assert g.u == 0.8

    again = tmp_path / "again.json"
    run_cli("gen", "--n", 20, "--u", 0.8, "--seed", 4, "--out", again)
    assert out.read_bytes() == again.read_bytes()


def test_gen_exhausted(run_cli, tmp_path, capsys):
    code = run_cli(
        "gen", "--n", 30, "--u", 0.01, "--out", tmp_path / "g.json",
        config="experiment:\n  attempt_limit: 2\n",
    )
    assert code == 1
    error = json.loads(capsys.readouterr().err)
    assert error["code"] == "generation-exhausted"


def test_route_prints_report(run_cli, worked_example, tmp_path, capsys):
    graph = tmp_path / "g.json"
    save_graph(worked_example.g, graph)
    trace = tmp_path / "t.jsonl"
    code = run_cli(
        "route", "--graph", graph, "--alg", "2face",
        "--src", worked_example["s"], "--dst", worked_example["d"],
        "--trace", trace,
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["delivered"] is True
    assert report["path_hops"] == 4
    assert report["preferred_hops"] == 4
    assert report["total_messages"] == 30
    assert report["overhead_messages"] == 17
    lines = [json.loads(line) for line in trace.read_text().splitlines()]
    assert len(lines) == 13
    assert sum(line["annihilated"] for line in lines) == 3
    assert lines[0]["from"] == worked_example["s"]


def test_route_single_direction_hand(run_cli, worked_example, tmp_path,
                                     capsys):
    graph = tmp_path / "g.json"
    save_graph(worked_example.g, graph)
    run_cli(
        "route", "--graph", graph, "--alg", "face2", "--hand", "L",
        "--src", worked_example["s"], "--dst", worked_example["d"],
    )
    assert json.loads(capsys.readouterr().out)["path_hops"] == 4


@pytest.mark.parametrize(
    "alg, code", [("flooding", "unknown-algorithm"),
                  ("g2vg", "unimplemented-algorithm")]
)
def test_route_rejects_algorithm(run_cli, square, tmp_path, capsys, alg,
                                 code):
    graph = tmp_path / "g.json"
    save_graph(square.g, graph)
    exit_code = run_cli(
        "route", "--graph", graph, "--alg", alg, "--src", 0, "--dst", 2
    )
    assert exit_code == 1
    assert json.loads(capsys.readouterr().err)["code"] == code


def test_route_rejects_bad_nodes(run_cli, square, tmp_path, capsys):
    graph = tmp_path / "g.json"
    save_graph(square.g, graph)
    assert run_cli(
        "route", "--graph", graph, "--alg", "2face", "--src", 1, "--dst", 1
    ) == 1
    assert json.loads(capsys.readouterr().err)["code"] == "same-endpoints"
    assert run_cli(
        "route", "--graph", graph, "--alg", "2face", "--src", 0, "--dst", 9
    ) == 1
    assert json.loads(capsys.readouterr().err)["code"] == "invalid-node"


def test_route_missing_graph(run_cli, tmp_path, capsys):
    assert run_cli(
        "route", "--graph", tmp_path / "nope.json", "--alg", "2face",
        "--src", 0, "--dst", 1,
    ) == 1
    assert json.loads(capsys.readouterr().err)["code"] == (
        "invalid-graph-file"
    )


def test_protocol_failure_exit_code(run_cli, square, tmp_path, mocker,
                                    capsys):
    graph = tmp_path / "g.json"
    save_graph(square.g, graph)
    mocker.patch(
        "facewalk.cli.run_algorithm",
        side_effect=ProtocolError.from_code(
            "not-delivered",
            params={"algorithm": "2face", "source": 0, "dest": 2},
        ),
    )
    code = run_cli(
        "route", "--graph", graph, "--alg", "2face", "--src", 0, "--dst", 2
    )
    assert code == 2
    assert json.loads(capsys.readouterr().err)["code"] == "not-delivered"


def test_unexpected_error_gets_trace_id(run_cli, square, tmp_path, mocker,
                                        capsys):
    graph = tmp_path / "g.json"
    save_graph(square.g, graph)
    mocker.patch("facewalk.cli.run_algorithm", side_effect=RuntimeError)
    code = run_cli(
        "route", "--graph", graph, "--alg", "2face", "--src", 0, "--dst", 2
    )
    assert code == 2
    assert "trace id" in capsys.readouterr().err


def test_invalid_settings(run_cli, tmp_path, capsys):
    code = run_cli(
        "gen", "--n", 5, "--u", 1, "--out", tmp_path / "g.json",
        config="experiment:\n  hand: X\n",
    )
    assert code == 1
    assert json.loads(capsys.readouterr().err)["code"] == "invalid-config"


def test_experiment_writes_results(run_cli, tmp_path):
    out = tmp_path / "out"
    assert run_cli(
        "experiment", "--preset", "tiny", "--seed", 3, "--out", out,
        config=TINY_PRESET,
    ) == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[0].startswith("graph_id,n,u,pair_id")
    assert len(lines) == 1 + 2 * 2 * 4
    summary = json.loads((out / "aggregates.json").read_text())
    assert summary["config"]["master_seed"] == 3
    assert len(summary["aggregates"]) == 4


def test_experiment_json_format(run_cli, tmp_path):
    out = tmp_path / "out"
    assert run_cli(
        "experiment", "--preset", "tiny", "--out", out, "--format", "json",
        config=TINY_PRESET,
    ) == 0
    rows = json.loads((out / "results.json").read_text())["rows"]
    assert len(rows) == 16


def test_experiment_unknown_preset(run_cli, tmp_path, capsys):
    assert run_cli(
        "experiment", "--preset", "huge", "--out", tmp_path
    ) == 1
    error = json.loads(capsys.readouterr().err)
    assert error["code"] == "invalid-config"
    assert "desk" in error["message"]


def test_trace_default_routes(run_cli, void, tmp_path):
    graph = tmp_path / "g.json"
    save_graph(void.g, graph)
    svg = tmp_path / "fig.svg"
    assert run_cli(
        "trace", "--graph", graph, "--src", void["s"], "--dst", void["d"],
        "--svg", svg,
    ) == 0
    data = json.loads((tmp_path / "fig.json").read_text())
    assert [p["label"] for p in data["paths"]] == ["GFG", "G2FG"]
    assert data["paths"][0]["nodes"] != data["paths"][1]["nodes"]
    assert svg.exists()


def test_trace_with_paths_file(run_cli, square, tmp_path):
    graph = tmp_path / "g.json"
    save_graph(square.g, graph)
    paths = tmp_path / "p.json"
    paths.write_text('[{"label": "hop", "nodes": [0, 1]}]')
    out = tmp_path / "fig.json"
    assert run_cli(
        "trace", "--graph", graph, "--paths", paths, "--json", out
    ) == 0
    assert json.loads(out.read_text())["paths"][0]["nodes"] == [0, 1]


def test_trace_needs_routes(run_cli, square, tmp_path, capsys):
    graph = tmp_path / "g.json"
    save_graph(square.g, graph)
    assert run_cli("trace", "--graph", graph) == 1
    assert json.loads(capsys.readouterr().err)["code"] == "invalid-config"
