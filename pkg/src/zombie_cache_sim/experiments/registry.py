"""Experiment registry for managing available experiment kinds."""

from typing import Any, Callable, Dict, Optional

from zombie_cache_sim.config import Settings, get_settings
from zombie_cache_sim.experiments.scenario import ExperimentKind, Scenario
from zombie_cache_sim.experiments.state import ExperimentOutput
from zombie_cache_sim.experiments.tasks import (
    run_aes,
    run_benign,
    run_covert,
    run_flushflush,
    run_fw,
    run_model_sweep,
    run_rsa,
)

ExperimentFunction = Callable[[Scenario, Settings], ExperimentOutput]


class ExperimentRegistry:
    """Registry mapping experiment kinds to the functions that run them."""

    def __init__(self):
        """Initialize experiment registry."""
        self._experiments: Dict[str, Dict[str, Any]] = {}
        self._register_default_experiments()

    def _register_default_experiments(self) -> None:
        """Register default experiments."""
        self.register(ExperimentKind.AES, run_aes, "First-round AES T-table Flush+Reload attack")
        self.register(ExperimentKind.RSA, run_rsa, "Square-and-multiply Flush+Reload attack")
        self.register(ExperimentKind.FW, run_fw, "Function watcher over four entry points")
        self.register(ExperimentKind.COVERT, run_covert, "Flush+Reload covert channel")
        self.register(ExperimentKind.MODEL_SWEEP, run_model_sweep, "Latency model sweep over F and R")
        self.register(ExperimentKind.BENIGN, run_benign, "Synthetic benign and flush-heavy workloads")
        self.register(ExperimentKind.FLUSHFLUSH, run_flushflush, "clflush latency per line state")

    def register(self, kind: ExperimentKind, function: ExperimentFunction, description: str) -> None:
        """
        Register an experiment.

        Args:
            kind: Experiment kind
            function: Function taking (scenario, settings)
            description: Experiment description
        """
        self._experiments[kind.value] = {
            "name": kind.value,
            "function": function,
            "description": description,
        }

    def get_experiment(self, kind: ExperimentKind) -> Optional[Dict[str, Any]]:
        """
        Get experiment by kind.

        Returns:
            Experiment definition or None
        """
        return self._experiments.get(kind.value)

    def list_experiments(self) -> Dict[str, Dict[str, Any]]:
        """List all registered experiments."""
        return self._experiments.copy()

    def execute(self, scenario: Scenario, settings: Optional[Settings] = None) -> ExperimentOutput:
        """
        Run a scenario's experiment.

        Args:
            scenario: Scenario to run
            settings: Settings (default: process settings)

        Returns:
            Experiment output
        """
        experiment = self.get_experiment(scenario.experiment)
        if not experiment:
            raise ValueError(f"Experiment '{scenario.experiment.value}' not found")
        return experiment["function"](scenario, settings or get_settings())


# Global registry instance
_registry: Optional[ExperimentRegistry] = None


def get_registry() -> ExperimentRegistry:
    """Get global experiment registry instance."""
    global _registry
    if _registry is None:
        _registry = ExperimentRegistry()
    return _registry
