"""Application settings for hafrm"""

import os
from typing import Optional
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

from ..utils.exceptions import ConfigError

# Load environment variables from .env file if it exists
load_dotenv()


class HafrmSettings(BaseModel):
    """Process-wide settings resolved from the environment"""

    seed_override: Optional[int] = Field(default=None, description="HAFRM_SEED, overrides config seeds")
    log_level: str = Field(default="INFO", description="HAFRM_LOG_LEVEL")
    otel_exporter: str = Field(default="none", description="OTEL_EXPORTER: none, console or otlp")
    otel_service_name: str = Field(default="hafrm")
    otel_endpoint: str = Field(default="http://localhost:4318")

    @field_validator("otel_exporter")
    @classmethod
    def check_exporter(cls, v: str) -> str:
        v = v.lower()
        if v not in ("none", "console", "otlp"):
            raise ValueError(f"unknown OTEL_EXPORTER {v!r}")
        return v

    @field_validator("log_level")
    @classmethod
    def upper_level(cls, v: str) -> str:
        return v.upper()


@lru_cache()
def get_settings() -> HafrmSettings:
    """
    Get settings from environment variables.
    Loads from .env file if present, otherwise from system environment.

    Raises:
        ConfigError: If HAFRM_SEED is set but is not an integer
    """
    raw_seed = os.getenv("HAFRM_SEED")
    seed_override = None
    if raw_seed not in (None, ""):
        try:
            seed_override = int(raw_seed)
        except ValueError:
            raise ConfigError(f"HAFRM_SEED must be an integer, got {raw_seed!r}")

    return HafrmSettings(
        seed_override=seed_override,
        log_level=os.getenv("HAFRM_LOG_LEVEL", "INFO"),
        otel_exporter=os.getenv("OTEL_EXPORTER", "none"),
        otel_service_name=os.getenv("OTEL_SERVICE_NAME", "hafrm"),
        otel_endpoint=os.getenv("OTEL_EXPORTER_ENDPOINT", "http://localhost:4318"),
    )


def resolve_seed(flag_seed: Optional[int], config_seed: Optional[int], default: int = 0) -> int:
    """Seed precedence: flag > HAFRM_SEED > config > default."""
    if flag_seed is not None:
        return flag_seed
    env_seed = get_settings().seed_override
    if env_seed is not None:
        return env_seed
    if config_seed is not None:
        return config_seed
    return default
