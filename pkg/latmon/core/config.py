from pydantic import field_validator
from pydantic_settings import BaseSettings
from typing import Optional


class Settings(BaseSettings):
    PROJECT_NAME: str = "latmon"

    # Fallback tolerance for every evaluator (LATMON_DEFAULT_TOL)
    DEFAULT_TOL: float = 1e-10

    # Shell tables
    CACHE_DIR: Optional[str] = None
    SHELL_MEMORY_BUDGET_BYTES: int = 1 << 30
    DIRECT_NORM_SQ_2D: int = 4_000_000
    DIRECT_NORM_SQ_3D: int = 250_000

    # Nested quadrature
    QUAD_MAX_LEVELS: int = 6

    # Fuzzing
    FUZZ_WORKERS: int = 1

    # Logging
    LOG_LEVEL: str = "INFO"

    model_config = {
        "case_sensitive": True,
        "env_file": ".env",
        "env_prefix": "LATMON_",
        "extra": "ignore",
    }

    @field_validator("DEFAULT_TOL")
    @classmethod
    def _positive_tol(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("DEFAULT_TOL must be positive")
        return value

    @field_validator(
        "SHELL_MEMORY_BUDGET_BYTES",
        "DIRECT_NORM_SQ_2D",
        "DIRECT_NORM_SQ_3D",
        "QUAD_MAX_LEVELS",
        "FUZZ_WORKERS",
    )
    @classmethod
    def _positive_int(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be at least 1")
        return value


settings = Settings()
