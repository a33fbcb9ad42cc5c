"""Shared helpers for locating built-in and user-level JSON configuration."""

from __future__ import annotations

import functools
import json
import logging
from pathlib import Path
from typing import Any

from mixstereo.config import DIR_CONFIGS, USER_CONFIG_DIR

logger = logging.getLogger("mixstereo")


# ---------- Path helpers ----------


@functools.cache
def _get_pkg_dir() -> Path:
    """Get the mixstereo package directory."""
    return Path(__file__).resolve().parent


def _get_home_config_dir() -> Path:
    """Get the ~/.mixstereo/configs/ directory for user-level overrides."""
    return Path.home() / USER_CONFIG_DIR / DIR_CONFIGS


def _get_pkg_configs_dir(subpackage: str) -> Path:
    """Get a subpackage's built-in configs directory, e.g. mixstereo/pipeline/configs/."""
    return _get_pkg_dir() / subpackage / DIR_CONFIGS


# ---------- File finding ----------


def _find_config_file(file_name: str, directories: list[Path]) -> Path | None:
    """Find a config file in the given directories, first match wins."""
    for directory in directories:
        path = directory / file_name
        if path.is_file():
            return path
    return None


def load_builtin_json(subpackage: str, file_name: str) -> dict[str, Any]:
    """Load a named JSON document, preferring the user's copy over the built-in one.

    The lookup order is:
    1. ~/.mixstereo/configs/{file_name} (user override)
    2. mixstereo/{subpackage}/configs/{file_name} (built-in)

    Args:
        subpackage: Package holding the built-in copy ("datasets" or "pipeline")
        file_name: JSON file name

    Returns:
        Parsed JSON object

    Raises:
        FileNotFoundError: If no candidate exists.
    """
    candidates = [_get_home_config_dir(), _get_pkg_configs_dir(subpackage)]
    for directory in candidates:
        path = _find_config_file(file_name, [directory])
        if path is None:
            continue
        try:
            with open(path, encoding="utf-8") as f:
                return json.load(f)  # type: ignore[no-any-return]
        except json.JSONDecodeError:
            logger.warning(f"Invalid JSON in config: {path}")
            continue
    raise FileNotFoundError(f"Config not found: {file_name}")
