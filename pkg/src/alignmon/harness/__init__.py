"""Experiment harness: bundled chains, experiment runners, bench, streaming."""

from .bench import run_bench, update_window_times
from .bundles import BUNDLED_CHAINS, load_bundled, resolve_environment
from .config import ConfigError, ExperimentConfig
from .experiments import (CoverageReport, DecisionRecord,
                          WeightedDifferentialMonitor, coverage_average,
                          coverage_differential, coverage_weighted,
                          discretized_gaussian, fairness_decision_experiment,
                          run_coverage, run_decision_table, run_monitoring,
                          run_sweep, safety_exit_experiment, weighted_truth_along,
                          wilson_interval)
from .stream import stream_monitor

__all__ = [
    "BUNDLED_CHAINS", "ConfigError", "CoverageReport", "DecisionRecord",
    "ExperimentConfig", "WeightedDifferentialMonitor", "coverage_average",
    "coverage_differential", "coverage_weighted", "discretized_gaussian",
    "fairness_decision_experiment", "load_bundled", "resolve_environment",
    "run_bench", "run_coverage", "run_decision_table", "run_monitoring",
    "run_sweep", "safety_exit_experiment", "stream_monitor",
    "update_window_times", "weighted_truth_along", "wilson_interval",
]
