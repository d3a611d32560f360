"""Simulator exception hierarchy."""

from typing import Optional


class ZombieSimError(Exception):
    """Base class for simulator errors."""


class CacheCorruptionError(ZombieSimError, RuntimeError):
    """Internal cache state violates a structural invariant."""


class InvalidInputError(ZombieSimError, ValueError):
    """An operation received an argument outside its domain."""


class ConfigError(ZombieSimError, ValueError):
    """Scenario configuration text could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.message = message
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
