from __future__ import annotations

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        populate_by_name=True,
    )

    # None means "not set in the environment"; callers fall back to DEFAULT_OUT_DIR.
    out_dir: Optional[str] = Field(default=None, alias="LAB_OUT_DIR")
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    threads: int = Field(default=1, ge=1, alias="LAB_THREADS")


DEFAULT_OUT_DIR = "./out"


def get_settings() -> Settings:
    # Re-read on every call so tests can patch the environment.
    return Settings()
