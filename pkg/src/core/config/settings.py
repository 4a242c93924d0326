"""
Application configuration settings
"""
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="COALITION_",
        env_file=".env",
        extra="ignore",
    )

    # Application
    APP_NAME: str = "Coalition Incentive Engine"
    VERSION: str = "1.0.0"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Workers (COALITION_THREADS)
    THREADS: int = 1

    # Enumeration bounds
    EXACT_MAX_PLAYERS: int = 24
    ENUMERATION_MAX_PLAYERS: int = 20
    LP_MAX_PLAYERS: int = 16
    AXIOM_MAX_PLAYERS: int = 12
    BLOCK_MAX_PLAYERS: int = 20
    PERMUTATION_MAX_PLAYERS: int = 10
    STABILITY_MAX_STATES: int = 100_000

    # Tolerances
    FEASIBILITY_TOL: float = 1e-9
    REPORT_TOL: float = 1e-6
    LEAST_CORE_TOL: float = 1e-7
    AXIOM_TOL: float = 1e-9
    SWITCH_THRESHOLD: float = 1e-9
    DEVIATION_TOL: float = 1e-9

    # Simplex iteration cap is SIMPLEX_CAP_FACTOR * 2^N
    SIMPLEX_CAP_FACTOR: int = 10

    # CLI defaults
    DEFAULT_SAMPLES: int = 10_000
    DEFAULT_SEED: int = 0
    DEFAULT_MAX_STEPS: int = 1_000

    @field_validator("THREADS")
    @classmethod
    def clamp_threads(cls, value: int) -> int:
        return max(1, value)


settings = Settings()
