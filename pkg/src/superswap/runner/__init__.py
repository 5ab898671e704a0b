"""Sweeps, scenarios, export and the command-line interface."""

from .config import ConfigError, ExperimentConfig, load_config
from .export import export
from .scenarios import delayed_choice_experiment, steering_into_past
from .sweeps import ResultRow, sweep_distance, sweep_waiting_time
from .validate import validate

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "delayed_choice_experiment",
    "export",
    "load_config",
    "steering_into_past",
    "sweep_distance",
    "sweep_waiting_time",
    "validate",
]
