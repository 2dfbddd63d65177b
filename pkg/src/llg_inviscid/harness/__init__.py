"""Experiment harness: configs, drivers, reports and the command line."""

from .config import ExperimentConfig, build_config, load_config
from .experiments import (
    run_equivalence_check,
    run_inviscid_sweep,
    run_lp_selftest,
    run_simulation,
    run_truncation_study,
)
from .report import ExperimentReport, emit_plotdata, read_plotdata

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "build_config",
    "emit_plotdata",
    "load_config",
    "read_plotdata",
    "run_equivalence_check",
    "run_inviscid_sweep",
    "run_lp_selftest",
    "run_simulation",
    "run_truncation_study",
]
