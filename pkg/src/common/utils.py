"""
Common utilities.
"""

import os

from common.constants import THREADS_ENV
from common.logger import Logger


def log_banner(logger: Logger, app_name: str, version: str, fields: dict[str, str]) -> None:
    """Log a startup banner with app name, version, and key/value fields."""
    logger.info("-" * 45)
    logger.info("  %s %s", app_name, version)
    for label, value in fields.items():
        logger.info("  %-14s %s", label + ":", value)
    logger.info("-" * 45)


def resolve_workers(requested: int | None = None) -> int:
    """
    Number of worker threads for node-parallel evaluation.

    The ``BOBK_THREADS`` environment variable caps the count; without it the
    CPU count is used.

    Args:
        requested: Explicit worker count, or None for the default.
    Returns:
        A worker count of at least 1.
    Raises:
        ValueError: If ``BOBK_THREADS`` is set but not a positive integer.
    """
    workers = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.getenv(THREADS_ENV)
    if cap:
        try:
            limit = int(cap)
        except ValueError as e:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {cap!r}") from e
        if limit < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {cap!r}")
        workers = min(workers, limit)
    return max(1, workers)


def format_float(value: float) -> str:
    """Shortest round-trip text for a float, used for byte-stable CSV output."""
    return repr(float(value))
