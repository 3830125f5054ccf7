"""
Configuration management for bobylev-flow.
"""

from copy import deepcopy
from pathlib import Path
from typing import Any

from bobylev_flow.classes import RunConfig
from common.config_utils import ensure_config_exists, get_config_path, get_template_path, load_config
from common.logger import Logger


def _merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Recursive dict update; override values replace, nested mappings merge."""
    merged = deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = deepcopy(value)
    return merged


class Config:
    """Configuration manager for bobylev-flow runs.

    Loads the JSON run configuration and validates it into a :class:`RunConfig`.
    Without an explicit path the standard location is used and created from
    the packaged template on first use. An explicit path must exist.
    """

    def __init__(self, logger: Logger, config_path: str | Path | None = None) -> None:
        """Initialize configuration.

        Args:
            logger: Logger instance for this config.
            config_path: Path to a JSON config file. If None, uses
                config.json in the standard location.
        Raises:
            FileNotFoundError: If ``config_path`` is given but does not exist.
            ValueError: If the file is not a JSON object.
        """
        self._logger = logger
        self._config_path = get_config_path(config_path)

        if config_path is None:
            template_path = get_template_path("bobylev_flow", "config.template.json")
            default_config: dict[str, Any] = {"help": "Run configuration for bobylev-flow"}
            if ensure_config_exists(self._logger, self._config_path, default_config, template_path):
                self._logger.info(f"Created new config at {self._config_path}")
        elif not self._config_path.is_file():
            raise FileNotFoundError(f"Config file not found: {self._config_path}")

        self._data: dict[str, Any] = load_config(self._logger, self._config_path)
        self._logger.info(f"Loaded configuration from {self._config_path}")

    @property
    def path(self) -> Path:
        return self._config_path

    @property
    def data(self) -> dict[str, Any]:
        return deepcopy(self._data)

    def to_settings(self, overrides: dict[str, Any] | None = None) -> RunConfig:
        """
        Validate the loaded data, with ``overrides`` merged in, into a RunConfig.

        Raises:
            pydantic.ValidationError: On any schema violation.
        """
        return RunConfig.model_validate(_merge(self._data, overrides or {}))
