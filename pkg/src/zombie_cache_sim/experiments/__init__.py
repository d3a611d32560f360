"""Scenario configs, experiment execution and result files."""

from zombie_cache_sim.experiments.flushflush import run_flushflush_probe
from zombie_cache_sim.experiments.registry import ExperimentRegistry, get_registry
from zombie_cache_sim.experiments.runner import ScenarioRunner, execute_scenario, exit_status
from zombie_cache_sim.experiments.scenario import ExperimentKind, Scenario, build_sim, parse_config
from zombie_cache_sim.experiments.state import ExperimentOutput, ScenarioResult, ScenarioStatus

__all__ = [
    "ExperimentKind",
    "ExperimentOutput",
    "ExperimentRegistry",
    "Scenario",
    "ScenarioResult",
    "ScenarioRunner",
    "ScenarioStatus",
    "build_sim",
    "execute_scenario",
    "exit_status",
    "get_registry",
    "parse_config",
    "run_flushflush_probe",
]
