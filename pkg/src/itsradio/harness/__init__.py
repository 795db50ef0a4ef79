"""Scenario configs, the band planner and bundled scenario runs."""

from .bands import BandInfo, band_report
from .config import MODES, ConfigError, ScenarioConfig
from .scenarios import (
    PrtRow,
    RunArtifacts,
    ScenarioError,
    list_scenarios,
    load_scenario,
    prt_sweep,
    run_scenario,
)

__all__ = [
    "BandInfo",
    "band_report",
    "MODES",
    "ConfigError",
    "ScenarioConfig",
    "PrtRow",
    "RunArtifacts",
    "ScenarioError",
    "list_scenarios",
    "load_scenario",
    "prt_sweep",
    "run_scenario",
]
