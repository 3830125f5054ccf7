"""
Logging for bobylev-flow runs.

One :class:`Logger` per process configures the root handlers: a stdout stream
(optional) and a rotating file ``<name>.log``. Solver components receive the
instance and log through it. Run phases are timed with :meth:`Logger.phase`;
the collected timings are written into the run metadata.
"""

import logging
import os
import sys
import time
from collections.abc import Iterator
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any

from common.constants import APP_HOME_DIR, LOG_DIR_ENV

# 2026.10.19 14:03:07.125 - bobylev_flow - INFO - message
LOG_FORMAT = "%(asctime)s.%(msecs)03d - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y.%m.%d %H:%M:%S"
ROTATION_BYTES = 10 * 1024 * 1024
ROTATION_BACKUPS = 5


def resolve_log_directory(custom_dir: str | Path | None = None) -> Path:
    """
    Log directory, created if missing.

    ``custom_dir`` (the ``--log-path`` flag) wins over ``BOBYLEV_LOG_DIR``,
    which wins over ``~/.bobylev-flow/logs``.
    """
    if custom_dir:
        directory = Path(custom_dir)
    elif from_env := os.getenv(LOG_DIR_ENV):
        directory = Path(from_env)
    else:
        directory = Path.home() / APP_HOME_DIR / "logs"
    directory.mkdir(parents=True, exist_ok=True)
    return directory


class Logger:
    """
    Process-wide logger of a bobylev-flow tool.

    Args:
        name: Logger name; also the log file stem.
        custom_dir: Log directory overriding the environment and the default.
        level: Threshold for both handlers.
        console: Also log to stdout. Commands whose stdout is data
            (``presets``, ``plotdata``, ``validate --schema``) turn it off.

    Example:
        >>> logger = Logger("bobylev_flow", console=False)
        >>> with logger.phase("evolution"):
        ...     pass
        >>> sorted(logger.timings)
        ['evolution']
    """

    def __init__(
        self,
        name: str,
        custom_dir: str | Path | None = None,
        level: int = logging.INFO,
        console: bool = True,
    ) -> None:
        self._name = name
        self._log_file = resolve_log_directory(custom_dir) / f"{name}.log"
        self._timings: dict[str, float] = {}

        formatter = logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT)
        handlers: list[logging.Handler] = [
            RotatingFileHandler(
                self._log_file, maxBytes=ROTATION_BYTES, backupCount=ROTATION_BACKUPS, encoding="utf-8"
            )
        ]
        if console:
            handlers.insert(0, logging.StreamHandler(sys.stdout))
        for handler in handlers:
            handler.setFormatter(formatter)
        logging.basicConfig(level=level, handlers=handlers, force=True)
        self._logger = logging.getLogger(name)

    @property
    def log_file(self) -> Path:
        return self._log_file

    @property
    def timings(self) -> dict[str, float]:
        """Seconds spent per phase name, in order of first completion."""
        return dict(self._timings)

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        """Time a run phase; repeated phases of one name accumulate, failing ones are still recorded."""
        self._logger.info("Phase '%s' started", name)
        started = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - started
            self._timings[name] = self._timings.get(name, 0.0) + elapsed
            self._logger.info("Phase '%s' finished in %.3f s", name, elapsed)

    def debug(self, msg: str, *args: object, **kwargs: Any) -> None:
        self._logger.debug(msg, *args, **kwargs)

    def info(self, msg: str, *args: object, **kwargs: Any) -> None:
        self._logger.info(msg, *args, **kwargs)

    def warning(self, msg: str, *args: object, **kwargs: Any) -> None:
        self._logger.warning(msg, *args, **kwargs)

    def error(self, msg: str, *args: object, **kwargs: Any) -> None:
        self._logger.error(msg, *args, **kwargs)

    def exception(self, msg: str, *args: object, **kwargs: Any) -> None:
        """Error with the active traceback."""
        self._logger.exception(msg, *args, **kwargs)
