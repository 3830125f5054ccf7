"""
Common pytest fixtures for all tests.
"""

from pathlib import Path
import sys

import pytest


# Ensure local ``src`` packages are imported before any similarly named
# third-party packages installed in the environment.
PROJECT_ROOT = Path(__file__).resolve().parent.parent
SRC_PATH = PROJECT_ROOT / "src"
if str(SRC_PATH) not in sys.path:
    sys.path.insert(0, str(SRC_PATH))

# Drop any pre-imported ``common`` package so tests always use the
# project-local implementation from ``src/common``.
for module_name in ["common", "common.logger", "common.constants"]:
    sys.modules.pop(module_name, None)

from common.logger import Logger
from bobylev_flow.collision import SphereQuadrature
from bobylev_flow.grid import SpectralGrid
from bobylev_flow.kernel import AngularKernel


@pytest.fixture
def logger(tmp_path: Path) -> Logger:
    """
    Create a logger for testing that writes its file under the test's tmp_path.
    """
    return Logger("test", str(tmp_path / "logs"))


@pytest.fixture
def small_grid() -> SpectralGrid:
    """
    Coarse grid for fast solver tests: 17^3 nodes on the ball of radius 4.
    """
    return SpectralGrid(R_max=4.0, N=17)


@pytest.fixture
def small_quad() -> SphereQuadrature:
    """
    Coarse sphere quadrature for fast solver tests.
    """
    return SphereQuadrature(n_theta=16, n_phi=8, n_direct=6)


@pytest.fixture
def kernel() -> AngularKernel:
    """
    Default non-cutoff kernel with mild singularity s = 1/4.
    """
    return AngularKernel(s=0.25)
