"""Scenario runner: executes scenarios and writes their outputs."""

from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence

import structlog
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from zombie_cache_sim.attacks.aes import normalize_heatmaps
from zombie_cache_sim.config import Settings, get_settings
from zombie_cache_sim.experiments import reports
from zombie_cache_sim.experiments.logging import ScenarioLoggingMiddleware
from zombie_cache_sim.experiments.registry import get_registry
from zombie_cache_sim.experiments.scenario import ExperimentKind, Scenario
from zombie_cache_sim.experiments.state import ScenarioResult, ScenarioStatus

logger = structlog.get_logger(__name__)

METRICS_SUFFIX = ".prom"
SUMMARY_FILENAME = "summary.csv"


def execute_scenario(scenario: Scenario, settings: Optional[Settings] = None) -> ScenarioResult:
    """
    Run one scenario in isolation.

    Failures never propagate: they come back as a FAILED result carrying
    the error message.
    """
    settings = settings or get_settings()
    result = ScenarioResult(
        name=scenario.name,
        experiment=scenario.experiment.value,
        mode=scenario.mode.value,
        status=ScenarioStatus.RUNNING,
        started_at=datetime.now(timezone.utc),
    )
    middleware = ScenarioLoggingMiddleware()
    try:
        result.output = middleware(
            scenario.name,
            scenario.experiment.value,
            scenario.mode.value,
            lambda: get_registry().execute(scenario, settings),
        )
        result.status = ScenarioStatus.COMPLETED
    except Exception as e:
        result.status = ScenarioStatus.FAILED
        result.error_message = f"{type(e).__name__}: {e}"
    result.completed_at = datetime.now(timezone.utc)
    return result


@retry(
    retry=retry_if_exception_type(OSError),
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=1, min=2, max=10),
    reraise=True,
)
def write_text(path: Path, text: str) -> None:
    """Write a file with LF line endings, retrying transient I/O errors."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


class ScenarioRunner:
    """Runs a batch of scenarios and writes one set of files per scenario."""

    def __init__(
        self,
        out_dir: Optional[str] = None,
        parallelism: Optional[int] = None,
        settings: Optional[Settings] = None,
    ):
        """
        Initialize runner.

        Args:
            out_dir: Default output directory (default: settings.OUTPUT_DIR)
            parallelism: Worker processes (default: settings.PARALLELISM)
            settings: Settings (default: process settings)
        """
        self.settings = settings or get_settings()
        self.out_dir = Path(out_dir or self.settings.OUTPUT_DIR)
        self.parallelism = max(1, parallelism or self.settings.PARALLELISM)

    def execute(self, scenarios: Sequence[Scenario]) -> List[ScenarioResult]:
        """Execute scenarios, in input order, without writing anything."""
        if self.parallelism == 1 or len(scenarios) <= 1:
            return [execute_scenario(s, self.settings) for s in scenarios]

        results: List[ScenarioResult] = []
        with ProcessPoolExecutor(max_workers=self.parallelism) as pool:
            futures = [pool.submit(execute_scenario, s, self.settings) for s in scenarios]
            for scenario, future in zip(scenarios, futures):
                try:
                    results.append(future.result())
                except Exception as e:
                    # The worker itself died; execute_scenario catches everything else.
                    results.append(
                        ScenarioResult(
                            name=scenario.name,
                            experiment=scenario.experiment.value,
                            mode=scenario.mode.value,
                            status=ScenarioStatus.FAILED,
                            error_message=f"{type(e).__name__}: {e}",
                        )
                    )
        return results

    def normalize_aes(self, results: Sequence[ScenarioResult]) -> int:
        """
        Rescale every AES heat map of the batch to the batch-wide peak.

        Returns:
            The shared peak hit count
        """
        aes = [
            r for r in results
            if r.status == ScenarioStatus.COMPLETED and r.experiment == ExperimentKind.AES.value and r.output
        ]
        peak = normalize_heatmaps([r.output.report for r in aes])
        for r in aes:
            r.output.rows = reports.aes_rows(r.output.report)
            r.output.svg = reports.render_heatmap_svg(r.output.report, f"{r.name} ({r.mode})")
        return peak

    def scenario_dir(self, scenario: Scenario) -> Path:
        return Path(scenario.output_dir) if scenario.output_dir else self.out_dir

    def write_outputs(self, scenario: Scenario, result: ScenarioResult) -> None:
        """Write a completed scenario's files; I/O failure marks it FAILED."""
        output = result.output
        if result.status != ScenarioStatus.COMPLETED or output is None:
            return
        base = self.scenario_dir(scenario)
        files = {f"{scenario.name}.csv": reports.to_csv(output.header, output.rows)}
        if output.svg is not None:
            files[f"{scenario.name}.svg"] = output.svg
        if scenario.zbd:
            files[f"{scenario.name}_alarms.csv"] = reports.to_csv(
                reports.ALARM_HEADER, [a.as_row() for a in output.alarms]
            )
        if scenario.run_log or self.settings.WRITE_RUN_LOG:
            files[f"{scenario.name}_runlog.csv"] = reports.to_csv(
                reports.RUNLOG_HEADER, [r.as_row() for r in output.run_log]
            )
        if output.metrics_text is not None:
            files[f"{scenario.name}{METRICS_SUFFIX}"] = output.metrics_text

        try:
            for filename, text in files.items():
                write_text(base / filename, text)
                result.files.append(str(base / filename))
        except OSError as e:
            result.status = ScenarioStatus.FAILED
            result.error_message = f"{type(e).__name__}: {e}"
            logger.error("scenario_output_failed", scenario=scenario.name, error=str(e))

    def summary_csv(self, results: Sequence[ScenarioResult]) -> str:
        return reports.to_csv(
            reports.SUMMARY_HEADER, [(r.name, r.status.value, r.headline) for r in results]
        )

    def run(self, scenarios: Sequence[Scenario]) -> List[ScenarioResult]:
        """
        Execute scenarios, write every output file and the batch summary.

        Returns:
            Results in input order
        """
        results = self.execute(scenarios)
        self.normalize_aes(results)
        for scenario, result in zip(scenarios, results):
            self.write_outputs(scenario, result)
        try:
            write_text(self.out_dir / SUMMARY_FILENAME, self.summary_csv(results))
        except OSError as e:
            logger.error("summary_write_failed", error=str(e))
        failed = sum(1 for r in results if r.status == ScenarioStatus.FAILED)
        logger.info("batch_completed", scenarios=len(results), failed=failed)
        return results


def exit_status(results: Sequence[ScenarioResult]) -> int:
    """1 if any scenario failed, else 0."""
    return 1 if any(r.status == ScenarioStatus.FAILED for r in results) else 0
