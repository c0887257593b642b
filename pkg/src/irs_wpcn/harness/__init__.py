"""Monte-Carlo harness: configuration, sweeps, statistics and outputs."""

from .config import ConfigError, ExperimentConfig, from_dict, load_config
from .experiments import (ROW_FIELDS, ResultRow, ResultTable, run_experiment, run_rate_region,
                          run_sweep_d12, run_sweep_n)
from .outputs import emit_outputs, read_csv, write_csv

__all__ = [
    "ConfigError", "ExperimentConfig", "ROW_FIELDS", "ResultRow", "ResultTable", "emit_outputs",
    "from_dict", "load_config", "read_csv", "run_experiment", "run_rate_region", "run_sweep_d12",
    "run_sweep_n", "write_csv",
]
