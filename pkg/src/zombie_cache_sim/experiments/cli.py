"""Command-line entry point: ``zombie-sim run CONFIG``."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from zombie_cache_sim.config import get_settings
from zombie_cache_sim.exceptions import ConfigError
from zombie_cache_sim.experiments.logging import configure_logging
from zombie_cache_sim.experiments.runner import ScenarioRunner, exit_status
from zombie_cache_sim.experiments.scenario import SEED_LIMIT, parse_config


def _seed(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < SEED_LIMIT:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {value}")
    return seed


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    p = argparse.ArgumentParser(prog="zombie-sim", description="Zombie-aware cache hierarchy experiments")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="Run every scenario in a config file")
    run.add_argument("config", help="Path to the scenario config")
    run.add_argument("--parallel", type=int, default=None, help="Scenarios run in parallel (processes)")
    run.add_argument("--paper-scale", action="store_true", help="16MB L3 and full workload counts")
    run.add_argument("--seed", type=_seed, default=None, help="Seed for scenarios that do not set one")
    run.add_argument("--out", default=None, help="Output directory")
    return p.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    settings = get_settings()
    configure_logging(settings.LOG_LEVEL, settings.LOG_FORMAT)

    if args.parallel is not None and args.parallel < 1:
        print("--parallel must be at least 1", file=sys.stderr)
        return 1

    config_path = Path(args.config)
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as e:
        print(f"Cannot read config {config_path}: {e}", file=sys.stderr)
        return 1

    try:
        scenarios = parse_config(
            text,
            default_seed=args.seed,
            paper_scale=args.paper_scale,
            settings=settings,
        )
    except ConfigError as e:
        print(f"{config_path}: {e}", file=sys.stderr)
        return 1

    runner = ScenarioRunner(out_dir=args.out, parallelism=args.parallel, settings=settings)
    results = runner.run(scenarios)
    sys.stdout.write(runner.summary_csv(results))
    return exit_status(results)


if __name__ == "__main__":
    sys.exit(main())
