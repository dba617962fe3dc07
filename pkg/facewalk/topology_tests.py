import json
import os.path

import numpy as np
import pytest

from .exceptions import ConfigError, NonPlanarGraph
from .geometry import Point
from .topology import (
    GeometricGraph,
    count_proper_crossings,
    crossing_edges,
    decompose_faces,
    gabriel_planarize,
    generate_unit_disk,
    load_graph,
    mirror,
    sample_pairs,
    save_graph,
    segment_is_clear,
    shortest_path_hops,
)


def test_adjacency_sorted_by_angle(square):
    g = square.g
    assert g.neighbors(square["s"]) == (square["a"], square["b"])
    assert g.neighbors(square["d"]) == (square["b"], square["a"])
    assert g.edge_count == 4
    assert g.edges == ((0, 1), (0, 3), (1, 2), (2, 3))


def test_rotation_around_center(k4):
    g = k4.g
    o, a, b, c = k4["o"], k4["a"], k4["b"], k4["c"]
    assert g.ccw_next(o, b) == c
    assert g.ccw_next(o, c) == a
    assert g.cw_next(o, b) == a
    assert g.cw_next(o, a) == c


def test_pendant_node_turns_back():
    g = GeometricGraph.from_edges([Point(0, 0), Point(1, 0)], [(0, 1)])
    assert g.cw_next(1, 0) == 0
    assert g.ccw_next(1, 0) == 0


def test_self_loop_rejected():
    with pytest.raises(ValueError):
        GeometricGraph.from_edges([Point(0, 0)], [(0, 0)])


def test_first_cw_from(diamond):
    g = diamond.g
    toward = g.position(diamond["d"])
    assert g.first_cw_from(diamond["s"], toward) == diamond["b"]
    # A neighbour exactly in the direction is returned.
    assert g.first_cw_from(diamond["a"], toward) == diamond["d"]


def test_save_and_load(tmp_path, worked_example):
    path = os.path.join(tmp_path, "g.json")
    save_graph(worked_example.g, path)
    with open(path) as f:
        data = json.load(f)
    assert data["planar"] is True
    assert len(data["nodes"]) == 9
    loaded = load_graph(path)
    assert loaded.positions == worked_example.g.positions
    assert loaded.adjacency == worked_example.g.adjacency


def test_load_rejects_bad_file(tmp_path):
    path = os.path.join(tmp_path, "g.json")
    with open(path, "w") as f:
        f.write('{"area_side": 1, "u": 1, "nodes": [], "edges": [[1, 0]]}')
    with pytest.raises(ConfigError) as exc_info:
        load_graph(path)
    assert exc_info.value.code == "invalid-graph-file"
    assert exc_info.value.exit_code == 1


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError) as exc_info:
        load_graph(os.path.join(tmp_path, "missing.json"))
    assert exc_info.value.code == "invalid-graph-file"


def test_unit_disk_is_deterministic(make_connected):
    first = make_connected(30, 0.6, 7)
    second = generate_unit_disk(30, 2.0, 0.6, seed=first.seed)
    assert second is not None
    assert second.positions == first.positions
    assert second.edges == first.edges
    assert first.is_connected()
    close = {
        (a, b)
        for a in first.nodes
        for b in first.nodes
        if a < b
        and np.hypot(
            first.position(a).x - first.position(b).x,
            first.position(a).y - first.position(b).y,
        )
        < 0.6
    }
    assert set(first.edges) == close


def test_unit_disk_rejects_disconnected():
    assert (
        generate_unit_disk(
            3, 10.0, 1.0, positions=[(0, 0), (0.5, 0), (5, 5)]
        )
        is None
    )


def test_unit_disk_rejects_coincident_nodes():
    assert (
        generate_unit_disk(3, 10.0, 5.0, positions=[(0, 0), (1, 1), (1, 1)])
        is None
    )


def test_unit_disk_arguments():
    with pytest.raises(ValueError):
        generate_unit_disk(1, 1.0, 1.0, seed=1)
    with pytest.raises(ValueError):
        generate_unit_disk(5, 1.0, 0.0, seed=1)


def test_gabriel_drops_edge_with_witness():
    g = generate_unit_disk(
        3, 10.0, 5.0, positions=[(0, 0), (2, 0), (1, 0.1)]
    )
    planar = gabriel_planarize(g)
    assert planar.planar
    assert not planar.has_edge(0, 1)
    assert planar.has_edge(0, 2) and planar.has_edge(1, 2)


def test_gabriel_is_planar_connected_subgraph(random_instances):
    for full, planar in random_instances:
        assert count_proper_crossings(planar) == 0
        assert planar.is_connected()
        assert set(planar.edges) <= set(full.edges)


def test_mirror_reflects_positions(diamond):
    flipped = mirror(diamond.g)
    assert flipped.position(diamond["d"]) == Point(-4, 0)
    assert flipped.edges == diamond.g.edges


def test_square_faces(square):
    fd = square.fd
    assert len(fd) == 2
    inner = fd.face_of[(square["s"], square["a"])]
    assert inner != fd.external
    assert fd.area[inner] == pytest.approx(1.0)
    assert fd.area[fd.external] == pytest.approx(-1.0)
    assert fd.nodes_of(inner) == [0, 1, 2, 3]


def test_k4_faces(k4):
    fd = k4.fd
    assert len(fd) == 4
    assert all(fd.size(face) == 3 for face in fd.faces)
    assert fd.borders(k4["a"], k4["b"], fd.external)
    assert not fd.borders(k4["o"], k4["a"], fd.external)


def test_faces_satisfy_euler(random_instances):
    for _, planar in random_instances:
        fd = decompose_faces(planar)
        assert len(planar) - planar.edge_count + len(fd) == 2
        # Every directed edge belongs to exactly one face.
        assert sum(fd.size(face) for face in fd.faces) == (
            2 * planar.edge_count
        )


def test_decompose_needs_planar_flag(compass_trap):
    with pytest.raises(NonPlanarGraph) as exc_info:
        decompose_faces(compass_trap.g)
    assert exc_info.value.code == "non-planar"


def test_decompose_detects_crossing_edges():
    g = GeometricGraph.from_edges(
        [Point(0, 0), Point(2, 0), Point(2, 2), Point(0, 2)],
        [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (1, 3)],
        planar=True,
    )
    with pytest.raises(NonPlanarGraph):
        decompose_faces(g)


def test_crossing_edges_diamond(diamond):
    fd = diamond.fd
    crossings = crossing_edges(diamond.g, fd, diamond["s"], diamond["d"])
    assert len(crossings) == 1
    crossing = crossings[0]
    assert crossing.edge == (diamond["a"], diamond["b"])
    assert crossing.t == pytest.approx(0.5)
    assert crossing.point == Point(2, 0)
    assert crossing.near_face == fd.face_of[(diamond["s"], diamond["b"])]
    assert crossing.leads_from(crossing.near_face) == crossing.far_face
    assert crossing.leads_from(crossing.far_face) is None
    assert crossing.leads_from(fd.external) is None


def test_crossing_edges_ordered_from_source(worked_example):
    w = worked_example
    crossings = crossing_edges(w.g, w.fd, w["s"], w["d"])
    assert [c.t for c in crossings] == pytest.approx([0.25, 0.625])
    assert crossings[0].far_face == crossings[1].near_face
    # Reversed session, reversed order.
    back = crossing_edges(w.g, w.fd, w["d"], w["s"])
    assert [c.edge for c in back] == [c.edge for c in reversed(crossings)]


def test_segment_is_clear(square):
    assert segment_is_clear(square.g, square["s"], square["d"])
    g = GeometricGraph.from_edges(
        [Point(0, 0), Point(1, 1), Point(2, 2)], [(0, 1), (1, 2)]
    )
    assert not segment_is_clear(g, 0, 2)
    assert segment_is_clear(g, 0, 1)


def test_sample_pairs(make_connected):
    g = make_connected(25, 0.7, 3)
    pairs = sample_pairs(g, 10, np.random.default_rng(5))
    assert len(pairs) == 10
    assert len(set(pairs)) == 10
    assert all(s != d for s, d in pairs)
    assert pairs == sample_pairs(g, 10, np.random.default_rng(5))


def test_shortest_path_hops(worked_example):
    w = worked_example
    assert shortest_path_hops(w.g, w["s"], w["d"]) == 4
    assert shortest_path_hops(w.g, w["s"], w["b"]) == 1
