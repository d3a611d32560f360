"""Structured logging setup and per-scenario logging wrapper."""

import logging
import sys
import time
from typing import Callable, TypeVar

import structlog

logger = structlog.get_logger(__name__)

T = TypeVar("T")


def configure_logging(level: str = "INFO", fmt: str = "console") -> None:
    """
    Configure structlog for the process.

    Args:
        level: Minimum level name
        fmt: "console" for human-readable output, "json" for one object per line
    """
    # stdout carries the summary table, so log lines go to stderr
    renderer = structlog.processors.JSONRenderer() if fmt == "json" else structlog.dev.ConsoleRenderer()
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, level.upper(), logging.INFO)),
        logger_factory=structlog.PrintLoggerFactory(sys.stderr),
        cache_logger_on_first_use=False,
    )


class ScenarioLoggingMiddleware:
    """Logs start, completion and failure of each scenario execution."""

    def __call__(self, name: str, experiment: str, mode: str, call_next: Callable[[], T]) -> T:
        """Run call_next, logging around it; exceptions are logged and re-raised."""
        start_time = time.time()

        logger.info("scenario_started", scenario=name, experiment=experiment, mode=mode)

        try:
            result = call_next()
            process_time = time.time() - start_time

            logger.info(
                "scenario_completed",
                scenario=name,
                experiment=experiment,
                mode=mode,
                process_time_ms=round(process_time * 1000, 2),
            )
            return result

        except Exception as e:
            process_time = time.time() - start_time
            logger.error(
                "scenario_failed",
                scenario=name,
                experiment=experiment,
                mode=mode,
                error=str(e),
                error_type=type(e).__name__,
                process_time_ms=round(process_time * 1000, 2),
            )
            raise
