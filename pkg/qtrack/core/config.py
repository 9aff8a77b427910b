"""Application configuration using pydantic-settings."""

import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any

from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError


class Settings(BaseSettings):
    """qtrack ambient settings, read from QTRACK_* variables or .env."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="QTRACK_",
        extra="ignore",
    )

    # Execution
    workers: int = 1
    out_dir: Path = Path("./runs")
    emit_stride: int = 100

    # Output
    quiet: bool = False


# Global settings instance
_settings: Settings | None = None


def get_settings() -> Settings:
    """Get or create settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def load_config_file(path: Path) -> dict[str, Any]:
    """
    Read an experiment description from disk.

    TOML files are experiment configs. JSON files are run manifests; the
    resolved config they embed is returned so a run can be replayed.

    Raises:
        ConfigError: if the file is missing or cannot be parsed
    """
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")

    try:
        if path.suffix == ".json":
            manifest = json.loads(path.read_text(encoding="utf-8"))
            if "config" not in manifest:
                raise ConfigError(f"{path} is not a run manifest (no 'config' field)")
            return dict(manifest["config"])
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e

    # Allow either a flat file or an [experiment] table
    return dict(data.get("experiment", data))
