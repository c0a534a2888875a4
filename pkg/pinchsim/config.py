"""Central configuration helpers for pinchsim runtime defaults."""
from __future__ import annotations

import logging
import os
from typing import Optional

from dotenv import load_dotenv

LOGGER = logging.getLogger(__name__)

ENV_PREFIX = "PINCHSIM"

load_dotenv(override=False)


def get_setting(name: str, default: Optional[str] = None) -> Optional[str]:
    """Fetch a configuration value from the prefixed environment."""

    value = os.getenv(f"{ENV_PREFIX}_{name}")
    if value is not None:
        return value
    return default


def resolve_env_key(name: str) -> str:
    """Return the environment variable key used for `name`."""

    return f"{ENV_PREFIX}_{name}"


def _parse_non_negative_int(name: str, default: int, *, event: str) -> int:
    raw_value = get_setting(name)
    if raw_value is None or not raw_value.strip():
        return default
    env_key = resolve_env_key(name)
    try:
        parsed = int(raw_value)
    except ValueError:
        LOGGER.warning(
            "Ignoring invalid %s=%r; expected non-negative integer.",
            env_key,
            raw_value,
            extra={"event": event, "env_var": env_key},
        )
        return default
    if parsed < 0:
        LOGGER.warning(
            "Ignoring negative %s=%r; expected non-negative integer.",
            env_key,
            raw_value,
            extra={"event": event, "env_var": env_key},
        )
        return default
    return parsed


WORKERS_DEFAULT = 1
BLOCK_SIZE_DEFAULT = 4096
LOG_CAPACITY_DEFAULT = 2048


def get_worker_count(override: Optional[int] = None) -> int:
    """Resolve the harness worker count; 0 means one worker per CPU."""

    if override is not None:
        requested = override
    else:
        requested = _parse_non_negative_int(
            "WORKERS", WORKERS_DEFAULT, event="config.invalid_workers"
        )
    if requested == 0:
        return max(1, os.cpu_count() or 1)
    return max(1, requested)


def get_block_size() -> int:
    """Trials per deterministic sampling block."""

    parsed = _parse_non_negative_int(
        "BLOCK_SIZE", BLOCK_SIZE_DEFAULT, event="config.invalid_block_size"
    )
    return parsed if parsed > 0 else BLOCK_SIZE_DEFAULT


def get_log_level(default: str = "INFO") -> str:
    return (get_setting("LOG_LEVEL") or default).upper()


def get_log_capacity() -> Optional[int]:
    """Size of the in-memory log buffer; None keeps every record."""

    raw_value = (get_setting("LOG_CAPACITY") or "").strip().lower()
    if raw_value in {"none", "unbounded"}:
        return None
    parsed = _parse_non_negative_int(
        "LOG_CAPACITY", LOG_CAPACITY_DEFAULT, event="config.invalid_log_capacity"
    )
    return parsed or None


__all__ = [
    "BLOCK_SIZE_DEFAULT",
    "ENV_PREFIX",
    "LOG_CAPACITY_DEFAULT",
    "WORKERS_DEFAULT",
    "get_block_size",
    "get_log_capacity",
    "get_log_level",
    "get_setting",
    "get_worker_count",
    "resolve_env_key",
]
