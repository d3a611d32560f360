"""Tests for package settings."""

import pytest
from pydantic import ValidationError

import zombie_cache_sim
from zombie_cache_sim.config import Settings


@pytest.mark.unit
def test_import_package():
    """The package imports and reports its version."""
    assert zombie_cache_sim.__version__ == "0.1.0"


@pytest.mark.unit
def test_defaults():
    settings = Settings(_env_file=None)
    assert settings.DEFAULT_SEED == 2019
    assert settings.DESK_L3_SIZE_BYTES == 1024 * 1024
    assert settings.PAPER_L3_SIZE_BYTES == 16 * 1024 * 1024
    assert settings.PAPER_ADT_DECAY_CYCLES == 32_000_000


@pytest.mark.unit
def test_environment_overrides(monkeypatch):
    """Prefixed environment variables override defaults."""
    monkeypatch.setenv("ZOMBIE_SIM_DEFAULT_SEED", "7")
    monkeypatch.setenv("ZOMBIE_SIM_ADT_DECAY_MS", "1")
    settings = Settings(_env_file=None)
    assert settings.DEFAULT_SEED == 7
    assert settings.PAPER_ADT_DECAY_CYCLES == 3_200_000


@pytest.mark.unit
@pytest.mark.parametrize("field,value", [("LOG_FORMAT", "xml"), ("PARALLELISM", 0), ("DEFAULT_SEED", -1)])
def test_invalid_settings(field, value):
    with pytest.raises(ValidationError):
        Settings(_env_file=None, **{field: value})
