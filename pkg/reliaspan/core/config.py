from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache

class Settings(BaseSettings):
    # Construction
    C_CONST_DEFAULT: float = 2048.0
    STAIRWAY_EXHAUSTIVE: bool = True

    # Locality-sensitive orderings
    LSO_PRECISION_BITS: int = 53
    LSO_SAMPLE_GRID_BITS: int = 5

    # Loss / vertex cover
    EXACT_VC_KERNEL_LIMIT: int = 40
    MAX_MATCHING_EDGE_LIMIT: int = 20000

    # Higher dimensions
    STRETCH_REL_TOL: float = 1e-9
    HD_MAX_MATERIALIZED_COPIES: int = 4096

    # Experiments
    HARNESS_WORKERS: int = 1
    CI_NORMAL_MIN_TRIALS: int = 100
    CONFIDENCE_LEVEL: float = 0.95
    OUTPUT_DIR: str = "results"

    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    return Settings()
