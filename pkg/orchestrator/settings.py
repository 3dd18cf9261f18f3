# orchestrator/settings.py

import functools
import logging
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_FORMAT = "%(asctime)s %(name)s: %(message)s"


class Settings(BaseSettings):
    """Runtime defaults, read from CONGESTION_* environment variables or a local .env."""

    model_config = SettingsConfigDict(env_prefix="CONGESTION_", extra="ignore")

    out_dir: Path = Path("results")
    workers: int = Field(1, ge=1)
    log_level: str = "INFO"
    scenario_dir: Optional[Path] = None


@functools.lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv()
    return Settings()


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(level=(level or get_settings().log_level).upper(), format=LOG_FORMAT)
