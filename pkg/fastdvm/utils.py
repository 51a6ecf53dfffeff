"""
Utility functions shared by the CLI commands
"""
import json
import logging
from pathlib import Path
from typing import Optional, Type, TypeVar

from pydantic import BaseModel, ValidationError

from fastdvm.config import settings
from fastdvm.exceptions import ConfigError

logger = logging.getLogger(__name__)

ConfigModel = TypeVar("ConfigModel", bound=BaseModel)


def load_config(path: Optional[str], schema: Type[ConfigModel]) -> ConfigModel:
    """
    Parse a JSON config file into the given schema

    Raises:
        ConfigError: unreadable file, invalid JSON or schema violation
    """
    data = {}
    if path is not None:
        try:
            raw = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}", kind="config-parse")
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}", kind="config-parse")
    return validate_config(data, schema, source=path or "defaults")


def validate_config(data: dict, schema: Type[ConfigModel], source: str = "config") -> ConfigModel:
    try:
        return schema.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{source} does not match {schema.__name__}: {e}", kind="schema")


def output_prefix(out: Optional[str], default_prefix: str) -> Path:
    """--out wins; otherwise the config's prefix under OUTPUT_DIR"""
    if out:
        return Path(out)
    return Path(settings.OUTPUT_DIR) / default_prefix


def with_suffix(prefix: Path, suffix: str) -> Path:
    return prefix.parent / f"{prefix.name}{suffix}"


def apply_runtime_overrides(deterministic: Optional[bool] = None, threads: Optional[int] = None) -> None:
    """
    Push CLI flags into the process settings before any transform runs.

    deterministic=None leaves the mode alone unless threads is given, in which
    case the worker count takes effect and deterministic mode is cleared.
    """
    if threads is not None:
        if threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {threads}", kind="schema")
        settings.THREADS = threads
        if deterministic is None:
            deterministic = False
    if deterministic is not None:
        settings.DETERMINISTIC = deterministic
    if settings.DETERMINISTIC and settings.THREADS > 1:
        logger.info(f"deterministic mode: ignoring THREADS={settings.THREADS}")
    logger.debug(f"fft workers: {settings.fft_workers()}")
