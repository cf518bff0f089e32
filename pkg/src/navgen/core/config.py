"""
Process-wide settings
"""

from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="NAVGEN_", env_file=".env", case_sensitive=False, extra="ignore")

    # Overrides every params seed when set (NAVGEN_SEED)
    seed: Optional[int] = None
    log_level: str = "INFO"

    # Episode-level parallelism for rollouts
    jobs: int = 1

    output_dir: str = "runs"


def get_settings() -> Settings:
    """Read settings from the environment on every call so tests can monkeypatch it"""
    return Settings()
