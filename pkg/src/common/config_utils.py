"""
Config file discovery and JSON artifact I/O.

Run configs live in the per-user config directory unless a path is given.
Every JSON file the tool writes (configs, reports, metadata, error records)
goes through :func:`write_json` so that formatting and non-finite handling
are the same everywhere.
"""

import importlib.resources as resources
import json
import math
import os
import shutil
import sys
from pathlib import Path
from typing import Any

from common.constants import DISTRIBUTION_NAME


def get_config_dir() -> Path:
    """``%APPDATA%/bobylev-flow`` on Windows, ``~/.config/bobylev-flow`` elsewhere."""
    if sys.platform == "win32":
        base = Path(os.environ.get("APPDATA", Path.home() / "AppData" / "Roaming"))
    else:
        base = Path.home() / ".config"
    return base / DISTRIBUTION_NAME


def get_config_path(custom_path: str | Path | None = None) -> Path:
    """The explicit path if one is given, else ``config.json`` in :func:`get_config_dir`."""
    return Path(custom_path) if custom_path else get_config_dir() / "config.json"


def ensure_config_exists(
    logger: Any,
    config_path: Path,
    template_content: dict[str, Any] | None = None,
    template_path: Path | None = None,
) -> bool:
    """
    Create ``config_path`` if it is missing.

    The packaged template file is copied when available; otherwise
    ``template_content`` is written.

    Returns:
        bool: True if a file was created, False if it existed or nothing could be written.
    """
    if config_path.exists():
        return False
    config_path.parent.mkdir(parents=True, exist_ok=True)

    if template_path is not None and template_path.exists():
        try:
            shutil.copy2(template_path, config_path)
        except OSError as e:
            if logger:
                logger.warning(f"Could not copy template {template_path}: {e}")
        else:
            if logger:
                logger.info(f"Created {config_path} from {template_path}")
            return True

    if not template_content:
        if logger:
            logger.error(f"No template available for {config_path}")
        return False
    try:
        write_json(config_path, template_content)
    except OSError as e:
        if logger:
            logger.error(f"Could not write default config {config_path}: {e}")
        return False
    if logger:
        logger.info(f"Created default config at {config_path}")
    return True


def load_config(logger: Any, config_path: Path) -> dict[str, Any]:
    """
    Read a JSON object from ``config_path``.

    Raises:
        FileNotFoundError: The file does not exist.
        ValueError: The file is not valid JSON or not an object.
    """
    text = Path(config_path).read_text(encoding="utf-8")
    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid JSON in config file {config_path}: {e}") from e
    if not isinstance(config, dict):
        raise ValueError(f"Config file {config_path} must contain a JSON object")
    if logger:
        logger.debug(f"Loaded config from {config_path}")
    return config


def get_template_path(package: str, filename: str = "config.template.json") -> Path | None:
    """Locate ``filename`` shipped inside ``package``, installed or in a source checkout."""
    try:
        resource = resources.files(package) / filename
        if resource.is_file():
            return Path(str(resource))
    except (ModuleNotFoundError, AttributeError, TypeError):
        pass
    candidates = (Path(entry) / package / filename for entry in sys.path)
    return next((candidate for candidate in candidates if candidate.exists()), None)


def _jsonable(value: Any) -> Any:
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return value


def write_json(path: Path, data: dict[str, Any]) -> Path:
    """Write ``data`` indented, with NaN and infinities stored as ``null``; parents are created."""
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(_jsonable(data), indent=2, ensure_ascii=False, allow_nan=False)
    path.write_text(payload + "\n", encoding="utf-8")
    return path
