"""
Engine configuration from the environment.

Values come from explicit overrides, then environment variables, then a
``.env`` file at the project root, then defaults.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv

from src.engine.qcomplex import DEFAULT_BUDGET

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class ConfigurationError(RuntimeError):
    """Raised when an environment variable holds an unusable value."""


@dataclass(frozen=True)
class EngineSettings:
    cache_dir: Path
    budget: int = DEFAULT_BUDGET
    workers: int = 1
    log_level: str = "INFO"
    use_cache: bool = True

    def with_overrides(self, **overrides: Any) -> "EngineSettings":
        """Copy with every override that is not None applied."""
        settings = replace(self, **{k: v for k, v in overrides.items() if v is not None})
        _check(settings)
        return settings


def project_root() -> Path:
    """Return the repository root."""
    return Path(__file__).resolve().parents[2]


def default_cache_dir() -> Path:
    return project_root() / "data" / "cache"


def _int_from_env(name: str, default: int) -> int:
    raw = (os.getenv(name) or "").strip()
    if not raw:
        return default
    try:
        return int(raw.replace("_", ""))
    except ValueError as exc:
        raise ConfigurationError(f"{name} must be an integer, got '{raw}'.") from exc


def _check(settings: EngineSettings) -> None:
    if settings.budget < 1:
        raise ConfigurationError(f"The budget must be at least 1 (MACLANE_BUDGET), got {settings.budget}.")
    if settings.workers < 1:
        raise ConfigurationError(f"Worker count must be at least 1 (MACLANE_WORKERS), got {settings.workers}.")
    if settings.log_level not in LOG_LEVELS:
        raise ConfigurationError(
            f"Unsupported MACLANE_LOG_LEVEL '{settings.log_level}'. Valid options: {', '.join(LOG_LEVELS)}."
        )


def load_settings(env_file: Optional[Path] = None) -> EngineSettings:
    """Read MACLANE_* variables, loading ``.env`` first if present."""
    env_path = env_file or project_root() / ".env"
    if env_path.exists():
        load_dotenv(env_path)

    cache_dir = (os.getenv("MACLANE_CACHE_DIR") or "").strip()
    settings = EngineSettings(
        cache_dir=Path(cache_dir).expanduser() if cache_dir else default_cache_dir(),
        budget=_int_from_env("MACLANE_BUDGET", DEFAULT_BUDGET),
        workers=_int_from_env("MACLANE_WORKERS", 1),
        log_level=(os.getenv("MACLANE_LOG_LEVEL") or "INFO").strip().upper(),
    )
    _check(settings)
    logger.debug("Loaded settings: %s", settings)
    return settings
