"""Experiment orchestration, output writers and the command-line interface."""

from .config import ConfigError, ExperimentConfig
from .experiments import (
    ResultRow,
    heatmap_summary,
    run_cost_base_study,
    run_heatmap,
    run_sweep,
    run_throughput,
    throughput_correlation,
)
from .output import write_outputs

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "heatmap_summary",
    "run_cost_base_study",
    "run_heatmap",
    "run_sweep",
    "run_throughput",
    "throughput_correlation",
    "write_outputs",
]
