"""Experiment harness: strategy dispatch, metrics and sweeps."""

from .metrics import COLUMNS, MetricRow, compute, summarize, workload_label
from .strategies import StrategyRun, StrategyRunner, parse_strategy, solve_one
from .sweep import SweepReport, SweepSpec, default_training_sweep, run_sweep

__all__ = [
    "COLUMNS",
    "MetricRow",
    "StrategyRun",
    "StrategyRunner",
    "SweepReport",
    "SweepSpec",
    "compute",
    "default_training_sweep",
    "parse_strategy",
    "run_sweep",
    "solve_one",
    "summarize",
    "workload_label",
]
