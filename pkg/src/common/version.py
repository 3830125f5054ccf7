"""
Version utilities for the bobylev-flow package.
"""

import importlib.metadata
import platform

from common.constants import DISTRIBUTION_NAME


def get_version() -> str:
    """Get the installed version of the bobylev-flow package.

    Returns:
        Version string, or '0.0.0' if package is not installed
        (e.g., during development without installation).
    """
    try:
        return importlib.metadata.version(DISTRIBUTION_NAME)
    except importlib.metadata.PackageNotFoundError:
        return '0.0.0'


def get_dependency_versions(names: tuple[str, ...] = ("numpy", "scipy", "pydantic")) -> dict[str, str]:
    """Versions of the package, the numerical stack and the interpreter, for run metadata."""
    versions = {DISTRIBUTION_NAME: get_version(), "python": platform.python_version()}
    for name in names:
        try:
            versions[name] = importlib.metadata.version(name)
        except importlib.metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions
