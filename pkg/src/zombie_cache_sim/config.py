"""Application configuration."""

from functools import lru_cache

from pydantic import Field, computed_field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Simulator settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="ZOMBIE_SIM_",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = Field(default="console", pattern="^(console|json)$")

    # Runs
    DEFAULT_SEED: int = Field(default=2019, ge=0, lt=2**64)
    OUTPUT_DIR: str = "./results"
    PARALLELISM: int = Field(default=1, ge=1)
    WRITE_RUN_LOG: bool = False

    # Scale
    DESK_L3_SIZE_BYTES: int = 1 * 1024 * 1024
    PAPER_L3_SIZE_BYTES: int = 16 * 1024 * 1024
    DESK_AES_ENCRYPTIONS: int = 2000
    PAPER_AES_ENCRYPTIONS: int = 10000
    FW_CALLS: int = 10000
    RSA_KEY_BITS: int = 3072
    COVERT_BITS: int = 1024

    # Clock & detection
    CLOCK_HZ: float = 3.2e9
    ADT_DECAY_MS: float = 10.0
    DESK_ADT_DECAY_CYCLES: int = Field(default=2_000_000, gt=0)

    # Monitoring
    ENABLE_METRICS: bool = True

    @computed_field
    @property
    def PAPER_ADT_DECAY_CYCLES(self) -> int:
        """Decay period of the detection table at full clock rate."""
        return int(self.ADT_DECAY_MS * self.CLOCK_HZ / 1000.0)


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()
