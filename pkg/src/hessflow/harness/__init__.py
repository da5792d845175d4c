"""Scenario configuration, golden presets and the command-line interface."""

from .config import ScenarioConfig, config_from_preset, load_config, parse_config
from .expr import expression_eval
from .presets import SAMPLERS, SCENARIOS
from .scenario import ExitReport, run_scenario

__all__ = [
    "ScenarioConfig",
    "config_from_preset",
    "load_config",
    "parse_config",
    "expression_eval",
    "SAMPLERS",
    "SCENARIOS",
    "ExitReport",
    "run_scenario",
]
