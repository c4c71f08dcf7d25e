"""
Config Module

Environment-driven settings for the CLI, the oracle and the renderer.
Values are read from the process environment; the CLI loads a `.env`
file first so local overrides work without exporting variables.
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

# Configure logging
logger = logging.getLogger(__name__)

_TRUE_VALUES = {"1", "true", "yes", "on"}


def _env_bool(name: str, default: bool) -> bool:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    return raw.strip().lower() in _TRUE_VALUES


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}, using {default}")
        return default


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        logger.warning(f"Ignoring non-numeric {name}={raw!r}, using {default}")
        return default


@dataclass
class CurveCrossConfig:
    """Runtime configuration for curvecross."""

    oracle_budget: int = 6
    oracle_max_enumeration: int = 200_000
    oracle_seed: int = 0
    log_level: str = "WARNING"
    experimental_boundary: bool = False
    render_seed: int = 7
    render_scale: float = 400.0

    @classmethod
    def from_env(cls) -> "CurveCrossConfig":
        """Load configuration from environment variables."""
        return cls(
            oracle_budget=_env_int("CURVECROSS_ORACLE_BUDGET", 6),
            oracle_max_enumeration=_env_int("CURVECROSS_ORACLE_MAX_ENUMERATION", 200_000),
            oracle_seed=_env_int("CURVECROSS_ORACLE_SEED", 0),
            log_level=os.environ.get("CURVECROSS_LOG_LEVEL", "WARNING").upper(),
            experimental_boundary=_env_bool("CURVECROSS_EXPERIMENTAL_BOUNDARY", False),
            render_seed=_env_int("CURVECROSS_RENDER_SEED", 7),
            render_scale=_env_float("CURVECROSS_RENDER_SCALE", 400.0),
        )


def load_config(dotenv_path: Optional[str] = None) -> CurveCrossConfig:
    """
    Load a `.env` file (if present) and build the configuration.

    Args:
        dotenv_path: Explicit `.env` location; defaults to python-dotenv's search

    Returns:
        CurveCrossConfig populated from the environment
    """
    load_dotenv(dotenv_path=dotenv_path, override=False)
    config = CurveCrossConfig.from_env()
    logger.debug(f"Loaded configuration: {config}")
    return config
