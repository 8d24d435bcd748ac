"""Experiment harness: TOML configs, the solve/exploitability/chart commands,
and deterministic persistence of traces and profiles."""

from .config import ConfigError, ExperimentConfig, build_environment, load_config
from .runner import exploitability_report, run

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "build_environment",
    "load_config",
    "exploitability_report",
    "run",
]
