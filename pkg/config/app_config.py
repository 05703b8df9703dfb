"""
Environment settings for the solver CLI and scripts
"""
import os
import logging
from dataclasses import dataclass
from typing import Optional

from dotenv import find_dotenv, load_dotenv

logger = logging.getLogger('app_config')

TOOL_VERSION = "1.0.0"

_TRUTHY = {"1", "true", "yes", "on"}


@dataclass(frozen=True)
class Settings:
    threads: Optional[int]
    log_dir: Optional[str]
    log_level: str
    allow_unsound_truncation: bool


def _int_or_none(name: str) -> Optional[int]:
    value = os.getenv(name)
    if not value:
        return None
    try:
        return int(value)
    except ValueError:
        logger.warning(f"{name}={value!r} is not an integer, ignoring it")
        return None


def load_settings() -> Settings:
    """Read settings from the environment (and a .env file in the working directory when present)"""
    load_dotenv(find_dotenv(usecwd=True))
    return Settings(
        threads=_int_or_none("DHEOM_THREADS"),
        log_dir=os.getenv("LOG_DIR") or None,
        log_level=os.getenv("DHEOM_LOG_LEVEL", "INFO").upper(),
        allow_unsound_truncation=os.getenv("DHEOM_ALLOW_UNSOUND_TRUNCATION", "").strip().lower() in _TRUTHY,
    )
