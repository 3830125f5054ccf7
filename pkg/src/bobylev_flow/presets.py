"""
Scenario catalog.

Every preset registers a factory for its initial measure and the region on
which its pointwise gap is monitored. Presets are looked up by name from the
run configuration.
"""

from collections.abc import Callable
from dataclasses import dataclass

import numpy

from bobylev_flow.constants import PRESET_NAMES
from bobylev_flow.diagnostics.regions import AnnulusDisk, Band, RegionSpec
from bobylev_flow.measures import DiracSum, GaussianMixture, LineMeasure, MeasureSpec, TabulatedDensity

E1 = (1.0, 0.0, 0.0)
E2 = (0.0, 1.0, 0.0)
E3 = (0.0, 0.0, 1.0)

TABULATED_NODES = 41
TABULATED_EXTENT = 6.0


@dataclass(frozen=True)
class Preset:
    """A named initial datum with its monitoring region."""

    name: str
    description: str
    build: Callable[[], MeasureSpec]
    region: Callable[[], RegionSpec]
    axis: tuple[float, float, float] = E3


_presets: dict[str, Preset] = {}


def preset(
    name: str, description: str, region: Callable[[], RegionSpec], axis: tuple[float, float, float] = E3
) -> Callable[[Callable[[], MeasureSpec]], Callable[[], MeasureSpec]]:
    """Register a measure factory as the scenario ``name``."""

    def decorator(factory: Callable[[], MeasureSpec]) -> Callable[[], MeasureSpec]:
        if name not in PRESET_NAMES:
            raise ValueError(f"Preset {name!r} is not in the catalog {PRESET_NAMES}")
        _presets[name] = Preset(name, description, factory, region, axis)
        return factory

    return decorator


def presets() -> list[str]:
    """Scenario names in catalog order."""
    return [name for name in PRESET_NAMES if name in _presets]


def get_preset(name: str) -> Preset:
    try:
        return _presets[name]
    except KeyError:
        raise ValueError(f"Unknown scenario {name!r}; available: {', '.join(presets())}") from None


def _equatorial_annulus() -> RegionSpec:
    # ξ⁻ nearly orthogonal to the line: ψ₀ = cos ξ₃ has no gap there at t = 0
    return AnnulusDisk(d=4.0, mu=2.0, epsilon=0.25, axis=E3)


@preset("dirac-origin", "Single Dirac mass at the origin (stationary)", lambda: Band(a1=1.0, a2=2.0))
def dirac_origin() -> MeasureSpec:
    return DiracSum.from_atoms([(1.0, (0.0, 0.0, 0.0))])


@preset("maxwellian", "Standard Maxwellian N(0, I) (equilibrium)", lambda: Band(a1=1.0, a2=2.0))
def maxwellian() -> MeasureSpec:
    return GaussianMixture.standard()


@preset("two-dirac-line", "Masses 1/2 at ±e3: concentrated on a line, psi0 = cos(xi3)", _equatorial_annulus)
def two_dirac_line() -> MeasureSpec:
    return LineMeasure.from_atoms(E3, [(0.5, 1.0), (0.5, -1.0)])


@preset(
    "three-dirac-noncoplanar",
    "Masses 1/3 at 0, e1 and e2: not concentrated on a line",
    lambda: AnnulusDisk.for_atoms(E1, E2),
)
def three_dirac_noncoplanar() -> MeasureSpec:
    return DiracSum.from_atoms([(1.0 / 3.0, (0.0, 0.0, 0.0)), (1.0 / 3.0, E1), (1.0 / 3.0, E2)])


def _bimodal() -> GaussianMixture:
    return GaussianMixture(
        weights=numpy.array([0.5, 0.5]),
        means=numpy.array([E3, [0.0, 0.0, -1.0]]),
        covariances=numpy.stack([0.5 * numpy.eye(3)] * 2),
    )


@preset("gaussian-mixture", "Two Gaussians of covariance I/2 centred at ±e3", lambda: Band(a1=1.0, a2=2.0))
def gaussian_mixture() -> MeasureSpec:
    return _bimodal()


@preset(
    "tabulated-density",
    "The gaussian-mixture density sampled on a 41^3 velocity grid",
    lambda: Band(a1=1.0, a2=2.0),
)
def tabulated_density() -> MeasureSpec:
    mixture = _bimodal()
    axis = numpy.linspace(-TABULATED_EXTENT, TABULATED_EXTENT, TABULATED_NODES)
    v = numpy.stack(numpy.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    values = numpy.zeros(v.shape[:3])
    for weight, mean, covariance in zip(mixture.weights, mixture.means, mixture.covariances, strict=True):
        variance = covariance[0, 0]
        squared = numpy.sum((v - mean) ** 2, axis=-1)
        values += weight * numpy.exp(-0.5 * squared / variance) / (2.0 * numpy.pi * variance) ** 1.5
    spacing = axis[1] - axis[0]
    return TabulatedDensity(values=values / (values.sum() * spacing ** 3), extent=TABULATED_EXTENT)


def build_measure(name: str) -> MeasureSpec:
    """Initial measure of the scenario ``name``."""
    return get_preset(name).build()
