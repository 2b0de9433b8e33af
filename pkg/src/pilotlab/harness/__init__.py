"""Configuration, experiment orchestration, plotting and the verify suite."""

from pilotlab.harness.config import RunConfig, build_config, format_config, load_config, parse_config
from pilotlab.harness.experiment import read_trace_csv, run_experiment, run_sweep

__all__ = [
    "RunConfig", "build_config", "format_config", "load_config", "parse_config",
    "read_trace_csv", "run_experiment", "run_sweep",
]
