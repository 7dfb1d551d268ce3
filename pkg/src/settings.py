"""Environment settings and logging setup shared by the CLI and the HTTP app."""

import logging
import os
from dataclasses import dataclass, field

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

DEFAULT_CORS_ORIGINS = [
    "http://localhost:5173",
    "http://localhost:8080",
    "http://localhost:3000",
    "http://127.0.0.1:5173",
    "http://127.0.0.1:8080",
    "http://127.0.0.1:3000",
]


def _int_env(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {value!r}") from None


@dataclass(frozen=True)
class Settings:
    log_level: str = "WARNING"
    workers: int = 1
    max_runs: int = 8
    cors_origins: list[str] = field(default_factory=lambda: list(DEFAULT_CORS_ORIGINS))


def load_settings() -> Settings:
    """Read settings from the environment after loading ``.env``."""
    load_dotenv()
    origins = [o.strip() for o in os.getenv("CORS_ORIGINS", "").split(",") if o.strip()]
    return Settings(
        log_level=os.getenv("SATGA_LOG_LEVEL", "WARNING").upper(),
        workers=max(1, _int_env("SATGA_WORKERS", 1)),
        max_runs=max(1, _int_env("SATGA_MAX_RUNS", 8)),
        cors_origins=origins or list(DEFAULT_CORS_ORIGINS),
    )


def configure_logging(level: str = "WARNING") -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
        force=True,
    )
