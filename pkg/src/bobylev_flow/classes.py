"""Run configuration models for bobylev-flow."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from bobylev_flow.collision import SphereQuadrature
from bobylev_flow.constants import (
    DEFAULT_GRADING_RATIO,
    DEFAULT_K,
    DEFAULT_N,
    DEFAULT_N_DIRECT,
    DEFAULT_N_PHI,
    DEFAULT_N_THETA,
    DEFAULT_PANEL_ORDER,
    DEFAULT_PROFILE,
    DEFAULT_R_MAX,
    DEFAULT_S,
    DEFAULT_THETA_SPLIT,
    DEFAULT_TOL_DRIFT,
    DEFAULT_WEIGHT_DELTA,
    DEFAULT_WEIGHT_N,
    HALF_PI,
    HOLDER_SAMPLES,
    INTEGRATORS,
    MAX_HALVINGS,
    PRESET_NAMES,
)
from bobylev_flow.diagnostics.regions import RegionSpec, region_from_data
from bobylev_flow.evolution import EvolutionConfig
from bobylev_flow.grid import SpectralGrid
from bobylev_flow.kernel import AngularKernel, available_profiles
from bobylev_flow.measures import available_variants


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class KernelSettings(_Section):
    s: float = Field(DEFAULT_S, gt=0.0, lt=1.0, description="Singularity exponent")
    K: float = Field(DEFAULT_K, gt=0.0, description="Singularity amplitude")
    profile: str = Field(DEFAULT_PROFILE, description="Registered kernel profile")
    cutoff: float | None = Field(None, gt=0.0, description="Cutoff level n of b_n = min{b, n}")

    @field_validator("profile")
    @classmethod
    def _known_profile(cls, value: str) -> str:
        if value not in available_profiles():
            raise ValueError(f"unknown profile {value!r}; expected one of {', '.join(available_profiles())}")
        return value

    def to_kernel(self) -> AngularKernel:
        return AngularKernel(s=self.s, K=self.K, cutoff_level=self.cutoff, profile_name=self.profile)


class GridSettings(_Section):
    R_max: float = Field(DEFAULT_R_MAX, gt=0.0)
    N: int = Field(DEFAULT_N, ge=5)

    @field_validator("N")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"N must be odd so that the origin is a node, got {value}")
        return value

    def to_grid(self) -> SpectralGrid:
        return SpectralGrid(R_max=self.R_max, N=self.N)


class QuadratureSettings(_Section):
    n_theta: int = Field(DEFAULT_N_THETA, ge=1)
    n_phi: int = Field(DEFAULT_N_PHI, ge=2)
    theta_split: float = Field(DEFAULT_THETA_SPLIT, gt=0.0, lt=HALF_PI)
    grading_ratio: float = Field(DEFAULT_GRADING_RATIO, gt=1.0)
    panel_order: int = Field(DEFAULT_PANEL_ORDER, ge=1)
    n_direct: int = Field(DEFAULT_N_DIRECT, ge=1)

    @field_validator("n_phi")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"n_phi must be even, got {value}")
        return value

    def to_quadrature(self) -> SphereQuadrature:
        return SphereQuadrature(**self.model_dump())


class EvolutionSettings(_Section):
    t_end: float = Field(1.0, gt=0.0)
    dt: float | None = Field(None, gt=0.0, description="Requested step; capped by the stability heuristic")
    integrator: str = "rk4"
    checkpoints: list[float] = Field(default_factory=list, description="Extra checkpoint times")
    tol_drift: float = Field(DEFAULT_TOL_DRIFT, gt=0.0)
    max_halvings: int = Field(MAX_HALVINGS, ge=0)
    alpha: float | None = Field(None, gt=0.0, le=2.0)
    workers: int | None = Field(None, ge=1)

    @field_validator("integrator")
    @classmethod
    def _known_integrator(cls, value: str) -> str:
        if value not in INTEGRATORS:
            raise ValueError(f"unknown integrator {value!r}; expected one of {', '.join(INTEGRATORS)}")
        return value

    def to_config(
        self, kernel: AngularKernel, grid: SpectralGrid, quad: SphereQuadrature, extra_times: list[float]
    ) -> EvolutionConfig:
        """Evolution config whose checkpoints are the union of ``checkpoints`` and ``extra_times`` up to t_end."""
        times = sorted({round(t, 12) for t in [*self.checkpoints, *extra_times] if 0.0 < t <= self.t_end})
        return EvolutionConfig(
            t_end=self.t_end,
            kernel=kernel,
            grid=grid,
            quad=quad,
            dt=self.dt,
            integrator=self.integrator,
            checkpoint_times=tuple(times),
            tol_drift=self.tol_drift,
            max_halvings=self.max_halvings,
            alpha=self.alpha,
            workers=self.workers,
        )


class DiagnosticsSettings(_Section):
    enabled: bool = True
    coercivity: bool = True
    coercivity_times: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.25, 0.5])
    gaps: bool = True
    gap_times: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2, 0.4])
    region: dict[str, Any] | None = Field(None, description="Gap region; defaults to the scenario's region")
    norms: bool = True
    weight_N: int = Field(DEFAULT_WEIGHT_N, ge=1)
    weight_delta: float = Field(DEFAULT_WEIGHT_DELTA, gt=0.0)
    decay_radii: list[float] = Field(default_factory=lambda: [4.0, 8.0, 16.0], min_length=3)
    energy_budget: bool = False
    moments: bool = True
    entropy: bool = True
    entropy_times: list[float] = Field(default_factory=lambda: [0.5, 0.75, 1.0])
    holder: bool = True
    holder_samples: int = Field(HOLDER_SAMPLES, ge=1)
    contraction: bool = False
    contraction_shift: float = 0.1
    contraction_cutoff: float = Field(1000.0, gt=0.0)
    contraction_alpha: float = Field(1.0, gt=0.0, le=2.0)
    refinement_N: int | None = Field(None, ge=5, description="Second grid size for refinement-stability intervals")

    @field_validator("region")
    @classmethod
    def _valid_region(cls, value: dict[str, Any] | None) -> dict[str, Any] | None:
        if value is not None:
            region_from_data(value)
        return value

    def region_spec(self) -> RegionSpec | None:
        return region_from_data(self.region) if self.region is not None else None


class RunConfig(_Section):
    """
    Complete run configuration.

    ``measure`` (a JSON measure with a ``variant`` tag) takes precedence over
    ``scenario``.
    """

    help: str | None = None
    scenario: str = "two-dirac-line"
    measure: dict[str, Any] | None = None
    kernel: KernelSettings = Field(default_factory=KernelSettings)
    grid: GridSettings = Field(default_factory=GridSettings)
    quadrature: QuadratureSettings = Field(default_factory=QuadratureSettings)
    evolution: EvolutionSettings = Field(default_factory=EvolutionSettings)
    diagnostics: DiagnosticsSettings = Field(default_factory=DiagnosticsSettings)
    output: str = "runs"
    run_id: str | None = Field(None, pattern=r"^[A-Za-z0-9_.-]+$")
    seed: int = 0

    @field_validator("scenario")
    @classmethod
    def _known_scenario(cls, value: str) -> str:
        if value not in PRESET_NAMES:
            raise ValueError(f"unknown scenario {value!r}; expected one of {', '.join(PRESET_NAMES)}")
        return value

    @field_validator("measure")
    @classmethod
    def _tagged_measure(cls, value: dict[str, Any] | None) -> dict[str, Any] | None:
        if value is not None and value.get("variant") not in available_variants():
            raise ValueError(
                f"measure variant {value.get('variant')!r} unknown; expected one of {', '.join(available_variants())}"
            )
        return value

    @model_validator(mode="after")
    def _default_run_id(self) -> "RunConfig":
        if self.run_id is None:
            self.run_id = "custom" if self.measure is not None else self.scenario
        return self

    @property
    def label(self) -> str:
        return "custom" if self.measure is not None else self.scenario
