import os.path
from typing import Dict, List, Optional, Tuple

import pytest
from attrs import define

from facewalk.geometry import Point
from facewalk.topology import (
    FaceDecomposition,
    GeometricGraph,
    decompose_faces,
    gabriel_planarize,
    generate_unit_disk,
)


@define
class Fixture:
    """A hand-built planar graph with named nodes."""

    g: GeometricGraph
    names: Dict[str, int]

    @property
    def fd(self) -> FaceDecomposition:
        return decompose_faces(self.g)

    def __getitem__(self, name: str) -> int:
        return self.names[name]

    def name_of(self, node: int) -> str:
        return {v: k for k, v in self.names.items()}[node]


def build(
    nodes: List[Tuple[str, float, float]],
    edges: List[Tuple[str, str]],
    planar: bool = True,
) -> Fixture:
    names = {name: i for i, (name, _, _) in enumerate(nodes)}
    g = GeometricGraph.from_edges(
        positions=[Point(x, y) for _, x, y in nodes],
        edges=[(names[a], names[b]) for a, b in edges],
        planar=planar,
        area_side=10.0,
        u=10.0,
    )
    return Fixture(g=g, names=names)


@pytest.fixture
def square() -> Fixture:
    """Four nodes on a unit square cycle; s and d are opposite corners."""
    return build(
        [("s", 0, 0), ("a", 1, 0), ("d", 1, 1), ("b", 0, 1)],
        [("s", "a"), ("a", "d"), ("d", "b"), ("b", "s")],
    )


@pytest.fixture
def k4() -> Fixture:
    """K4 drawn as a triangle around a central node."""
    return build(
        [("a", 0, 0), ("b", 4, 0), ("c", 2, 4), ("o", 2, 1.5)],
        [
            ("a", "b"),
            ("b", "c"),
            ("c", "a"),
            ("o", "a"),
            ("o", "b"),
            ("o", "c"),
        ],
    )


@pytest.fixture
def diamond() -> Fixture:
    """Two triangles sharing the a-b edge that crosses the s-d segment.

    The right hand walks the long way (s, b, a, b, d); the left hand
    goes s, a, d.
    """
    return build(
        [("s", 0, 0), ("a", 2, 1), ("b", 2, -1), ("d", 4, 0)],
        [("s", "a"), ("s", "b"), ("a", "b"), ("a", "d"), ("b", "d")],
    )


@pytest.fixture
def worked_example() -> Fixture:
    """Three faces crossed by the s-d segment.

    b and c are the entry points. Under FIFO scheduling the token pairs
    annihilate at g, h and k and the first token reaches d through
    c, e, d.
    """
    return build(
        [
            ("s", 0, 0),
            ("a", 1, -1),
            ("b", 2, 1),
            ("g", 2, -2),
            ("c", 5, 1),
            ("h", 5, -2),
            ("e", 6.5, 1),
            ("d", 8, 0),
            ("k", 6.5, -1.5),
        ],
        [
            ("s", "a"),
            ("a", "g"),
            ("g", "b"),
            ("b", "s"),
            ("b", "c"),
            ("g", "h"),
            ("c", "h"),
            ("c", "e"),
            ("e", "d"),
            ("h", "k"),
            ("k", "d"),
        ],
    )


@pytest.fixture
def void() -> Fixture:
    """Greedy from s gets stuck in the pocket at m.

    Face mode from m takes the lower rim and greedy resumes at q.
    """
    return build(
        [
            ("s", -2, 0),
            ("m", 0, 0),
            ("p", -1, 2),
            ("l", -1, -2),
            ("t", 2, 3),
            ("q", 2, -3),
            ("d", 5, 0),
        ],
        [
            ("s", "m"),
            ("m", "p"),
            ("m", "l"),
            ("s", "p"),
            ("s", "l"),
            ("p", "t"),
            ("l", "q"),
            ("t", "d"),
            ("q", "d"),
        ],
    )


@pytest.fixture
def shared_entry() -> Fixture:
    """n is the entry point of two consecutive crossings.

    The segment leaves the s, p1, n, t face across n-p1, runs through
    the n, p1, p2 triangle and leaves it across n-p2 into the face of d.
    """
    return build(
        [
            ("s", 0, 0),
            ("t", 3, 4),
            ("n", 6, 1),
            ("p1", 2, -6),
            ("p2", 4, -6),
            ("q", 9, -5),
            ("d", 10, 0),
        ],
        [
            ("s", "t"),
            ("t", "n"),
            ("n", "d"),
            ("s", "p1"),
            ("p1", "p2"),
            ("n", "p1"),
            ("n", "p2"),
            ("p2", "q"),
            ("q", "d"),
        ],
    )


@pytest.fixture
def island() -> Fixture:
    """A triangle hanging from top inside the outer cycle.

    The segment leaves the surrounding face across u-v (entry point v),
    crosses the triangle and comes back into the same face across v-w
    (entry point w). The left hand reaches w before v.
    """
    return build(
        [
            ("s", 0, 0),
            ("t1", 2, 3),
            ("top", 7, 3),
            ("t2", 9, 3),
            ("d", 10, 0),
            ("b2", 8, -3),
            ("b1", 2, -3),
            ("u", 4, 2),
            ("v", 5, -2),
            ("w", 7, 2),
        ],
        [
            ("s", "t1"),
            ("t1", "top"),
            ("top", "t2"),
            ("t2", "d"),
            ("d", "b2"),
            ("b2", "b1"),
            ("b1", "s"),
            ("top", "w"),
            ("u", "v"),
            ("v", "w"),
            ("w", "u"),
        ],
    )


@pytest.fixture
def compass_trap() -> Fixture:
    """Compass routing from x0 bounces between x0 and x1 forever."""
    return build(
        [
            ("x0", 2, 0),
            ("x1", 0, 2),
            ("x2", -2, 0),
            ("x3", 0, -2),
            ("far", 5, 5),
            ("d", 0, 0),
        ],
        [
            ("x0", "x1"),
            ("x1", "x2"),
            ("x2", "x3"),
            ("x3", "x0"),
            ("x0", "far"),
            ("far", "d"),
        ],
        planar=False,
    )


def connected_graph(
    n: int, u: float, seed: int, area_side: float = 2.0, tries: int = 500
) -> GeometricGraph:
    """The first connected unit-disk graph at or after `seed`."""
    for offset in range(tries):
        g: Optional[GeometricGraph] = generate_unit_disk(
            n, area_side, u, seed=seed + offset
        )
        if g is not None:
            return g
    raise RuntimeError(f"No connected graph for n={n}, u={u}.")


@pytest.fixture
def make_connected():
    return connected_graph


@pytest.fixture(scope="session")
def random_instances():
    """A handful of (full, planar) graph pairs of moderate density."""
    result = []
    for seed in (11, 23, 37, 41, 53):
        full = connected_graph(40, 0.6, seed * 1000)
        result.append((full, gabriel_planarize(full)))
    return result


@pytest.fixture
def log_dir(tmp_path, monkeypatch):
    """Send the log file of commands run by a test to a temporary place."""
    if os.path.isdir("./playground/logs"):
        log_dir = "./playground/logs"
    else:
        log_dir = str(tmp_path)
    cfg_file = os.path.join(tmp_path, "cfg.yaml")
    with open(cfg_file, "w") as f:
        f.write("log:\n  console_level: 30\n")
    monkeypatch.setenv("FACEWALK_CONFIG", cfg_file)
    monkeypatch.setenv(
        "FACEWALK_LOG__FILE_PATH", os.path.join(log_dir, "facewalk.log")
    )
    return log_dir
