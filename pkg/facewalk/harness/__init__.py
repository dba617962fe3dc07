"""Experiment harness: sweeps, metrics, result files and figures."""
from facewalk.harness.emit import emit_results
from facewalk.harness.experiment import (
    ExperimentResult,
    aggregate,
    break_even,
    run_experiment,
)
from facewalk.harness.figure import emit_route_figure

__all__ = [
    "ExperimentResult",
    "aggregate",
    "break_even",
    "emit_results",
    "emit_route_figure",
    "run_experiment",
]
