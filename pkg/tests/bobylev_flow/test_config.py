"""Tests for run configuration models and config file loading."""

import json
from pathlib import Path
from tempfile import TemporaryDirectory

import pytest
from pydantic import ValidationError

from bobylev_flow.classes import EvolutionSettings, GridSettings, RunConfig
from bobylev_flow.collision import SphereQuadrature
from bobylev_flow.config import Config
from bobylev_flow.grid import SpectralGrid
from bobylev_flow.kernel import AngularKernel
from common.config_utils import get_template_path, load_config
from common.logger import Logger


class TestRunConfig:
    """Schema defaults and validation."""

    def test_defaults(self) -> None:
        """An empty config runs the line scenario on the default grid."""
        config = RunConfig()
        assert config.scenario == "two-dirac-line"
        assert config.run_id == "two-dirac-line"
        assert config.label == "two-dirac-line"
        assert config.grid.N == 49
        assert config.kernel.to_kernel().s == 0.25

    def test_custom_measure_run_id(self) -> None:
        """A JSON measure overrides the scenario and names the run 'custom'."""
        config = RunConfig(measure={"variant": "DiracSum", "weights": [1.0], "positions": [[0.0, 0.0, 0.0]]})
        assert config.run_id == "custom"
        assert config.label == "custom"

    def test_explicit_run_id(self) -> None:
        """An explicit run id is kept."""
        assert RunConfig(scenario="maxwellian", run_id="eq-1").run_id == "eq-1"

    @pytest.mark.parametrize("data", [
        {"unknown": 1},
        {"grid": {"N": 48}},
        {"grid": {"N": 3}},
        {"quadrature": {"n_phi": 31}},
        {"scenario": "four-dirac"},
        {"measure": {"variant": "Cauchy"}},
        {"kernel": {"profile": "cubic"}},
        {"kernel": {"s": 1.0}},
        {"evolution": {"integrator": "euler"}},
        {"diagnostics": {"decay_radii": [1.0, 2.0]}},
        {"diagnostics": {"region": {"variant": "Sphere"}}},
        {"run_id": "has spaces"},
    ])
    def test_invalid_config(self, data: dict) -> None:
        """Every schema violation raises ValidationError."""
        with pytest.raises(ValidationError):
            RunConfig.model_validate(data)

    def test_checkpoints_are_filtered(self) -> None:
        """Checkpoint times are merged, deduplicated and restricted to (0, t_end]."""
        settings = EvolutionSettings(t_end=0.5, checkpoints=[0.25, 0.75, 0.0])
        config = settings.to_config(
            AngularKernel(s=0.25), SpectralGrid(R_max=4.0, N=9), SphereQuadrature(n_theta=16, n_phi=8, n_direct=6),
            [0.1, 0.25, 0.5],
        )
        assert config.checkpoint_times == (0.1, 0.25, 0.5)
        assert config.t_end == 0.5

    def test_grid_settings(self) -> None:
        """The grid section builds the matching spectral grid."""
        grid = GridSettings(R_max=4.0, N=9).to_grid()
        assert grid.spacing == pytest.approx(1.0)

    def test_packaged_template_is_valid(self, logger: Logger) -> None:
        """The template shipped with the package validates as is."""
        template = get_template_path("bobylev_flow", "config.template.json")
        assert template is not None
        config = RunConfig.model_validate(load_config(logger, template))
        assert config.scenario == "two-dirac-line"
        assert config.evolution.checkpoints == [0.25, 0.5, 0.75, 1.0]


class TestConfigFile:
    """Loading and merging a config file."""

    def test_missing_explicit_path(self, logger: Logger) -> None:
        """An explicit path must exist."""
        with TemporaryDirectory() as temp_dir:
            with pytest.raises(FileNotFoundError, match="Config file not found"):
                Config(logger, Path(temp_dir) / "missing.json")

    def test_overrides_are_merged(self, logger: Logger) -> None:
        """Overrides replace leaves and keep sibling keys of nested sections."""
        with TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "run.json"
            path.write_text(
                json.dumps({"scenario": "maxwellian", "grid": {"R_max": 4.0, "N": 9}, "evolution": {"t_end": 2.0}}),
                encoding="utf-8",
            )
            config = Config(logger, path)
            settings = config.to_settings({"evolution": {"t_end": 0.5}, "run_id": "short"})

        assert config.path == path
        assert config.data["evolution"] == {"t_end": 2.0}
        assert settings.scenario == "maxwellian"
        assert settings.grid.N == 9
        assert settings.evolution.t_end == 0.5
        assert settings.run_id == "short"

    def test_invalid_file_content(self, logger: Logger) -> None:
        """A schema violation surfaces from to_settings."""
        with TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "run.json"
            path.write_text(json.dumps({"grid": {"N": 10}}), encoding="utf-8")
            config = Config(logger, path)
            with pytest.raises(ValidationError, match="N must be odd"):
                config.to_settings()
