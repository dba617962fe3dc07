from typing import Iterator, List

import numpy as np
import pytest

from facewalk.harness import ExperimentResult, run_experiment
from facewalk.routing import RoutingInstance
from facewalk.schemas.experiment import ExperimentConfig
from facewalk.settings import desk_preset
from facewalk.topology import decompose_faces, sample_pairs


@pytest.fixture(scope="session")
def desk_config() -> ExperimentConfig:
    return desk_preset().model_copy(update={"master_seed": 2024})


@pytest.fixture(scope="session")
def desk_result(desk_config) -> ExperimentResult:
    """One run of the desk sweep shared by the sweep-level checks."""
    return run_experiment(desk_config)


def routing_instances(
    random_instances, per_graph: int, seed: int = 7
) -> Iterator[RoutingInstance]:
    rng = np.random.default_rng(seed)
    for full, planar in random_instances:
        fd = decompose_faces(planar)
        for s, d in sample_pairs(planar, per_graph, rng):
            yield RoutingInstance.build(full, s, d, planar=planar, fd=fd)


@pytest.fixture
def twenty_instances(random_instances) -> List[RoutingInstance]:
    return list(routing_instances(random_instances, 4))
