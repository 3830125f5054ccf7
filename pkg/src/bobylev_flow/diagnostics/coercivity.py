"""
Time-degenerate and static coercivity certificates.

The collision-weighted gap G(ξ) = ∫ b (1 − |ψ(ξ⁻)|) dσ is computed once per
field with the collision quadrature; every probe function then only costs a
weighted grid sum.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy

from bobylev_flow.collision import CollisionOperator, SphereQuadrature
from bobylev_flow.diagnostics.regions import Band
from bobylev_flow.grid import CharField, SpectralGrid
from bobylev_flow.kernel import AngularKernel
from bobylev_flow.measures import LineMeasure
from common.logger import Logger

Probe = Callable[[numpy.ndarray], numpy.ndarray]


@dataclass(frozen=True)
class CoercivityFunctionals:
    """lhs = t Σ⟨ξ⟩^{2s}|h|², rhs_main = Σ G|h|², rhs_l2 = Σ|h|² (grid sums times h³)."""

    t: float
    lhs: float
    rhs_main: float
    rhs_l2: float

    @property
    def constant(self) -> float:
        """Smallest C with lhs ≤ C (rhs_main + rhs_l2); infinite when rhs_main vanishes and lhs does not."""
        if self.lhs == 0.0:
            return 0.0
        if self.rhs_main <= 0.0:
            return math.inf
        return self.lhs / (self.rhs_main + self.rhs_l2)


def _japanese(points: numpy.ndarray) -> numpy.ndarray:
    return numpy.sqrt(1.0 + numpy.sum(numpy.asarray(points) ** 2, axis=-1))


def collision_gap(
    field: CharField,
    kernel: AngularKernel,
    quad: SphereQuadrature | None = None,
    *,
    logger: Logger | None = None,
    workers: int | None = None,
) -> numpy.ndarray:
    """G(ξ) = ∫ b (1 − |ψ(ξ⁻)|) dσ on every ball node (0 elsewhere)."""
    grid = field.grid
    mask = grid.ball_mask & (grid.radii > 0.0)
    operator = CollisionOperator(logger, kernel, quad, regularized=not kernel.is_cutoff, workers=workers)
    gap = numpy.zeros(grid.radii.shape)
    gap[mask] = operator.gap_integral(field, grid.nodes[mask])
    return gap


def functionals_from_gap(gap: numpy.ndarray, grid: SpectralGrid, t: float, h: Probe, s: float) -> CoercivityFunctionals:
    """Coercivity sums for probe ``h`` given a precomputed G."""
    mask = grid.ball_mask
    nodes = grid.nodes[mask]
    weight = numpy.abs(numpy.asarray(h(nodes))) ** 2 * grid.spacing ** 3
    return CoercivityFunctionals(
        t=t,
        lhs=t * float(numpy.sum(_japanese(nodes) ** (2.0 * s) * weight)),
        rhs_main=float(numpy.sum(gap[mask] * weight)),
        rhs_l2=float(numpy.sum(weight)),
    )


def coercivity_functionals(
    field: CharField,
    t: float,
    h: Probe,
    kernel: AngularKernel,
    quad: SphereQuadrature | None = None,
    *,
    t_max: float | None = None,
    logger: Logger | None = None,
    workers: int | None = None,
) -> CoercivityFunctionals:
    """
    Both sides of the time-degenerate coercivity estimate for probe ``h``.

    Raises:
        ValueError: If ``t`` lies outside [0, t_max].
    """
    if t < 0.0 or (t_max is not None and t > t_max):
        raise ValueError(f"Coercivity time t = {t} outside the run interval [0, {t_max}]")
    gap = collision_gap(field, kernel, quad, logger=logger, workers=workers)
    return functionals_from_gap(gap, field.grid, t, h, kernel.s)


@dataclass(frozen=True)
class CoercivityCertificate:
    """Single constant C over all (t, probe) records and the largest t up to which it holds."""

    constant: float
    horizon: float
    records: tuple[CoercivityFunctionals, ...]

    @property
    def holds(self) -> bool:
        return math.isfinite(self.constant)


def certify(records: Sequence[CoercivityFunctionals], constant: float | None = None) -> CoercivityCertificate:
    """
    Fit C = max over records of lhs/(rhs_main + rhs_l2) (or check a given C).

    The horizon is the largest recorded t such that every record with time ≤ t
    satisfies the inequality with C.
    """
    fitted = max((record.constant for record in records), default=0.0) if constant is None else constant
    horizon = 0.0
    for record in sorted(records, key=lambda r: r.t):
        if record.lhs <= fitted * (record.rhs_main + record.rhs_l2) * (1.0 + 1e-12):
            horizon = record.t
        else:
            break
    return CoercivityCertificate(constant=fitted, horizon=horizon, records=tuple(records))


@dataclass(frozen=True)
class StaticCoercivity:
    """Anisotropic lower bound for line data at t = 0: rhs ≥ c · lhs."""

    lhs: float
    rhs: float
    isotropic_lhs: float
    kappa: float

    @property
    def constant(self) -> float:
        return self.rhs / self.lhs if self.lhs > 0.0 else math.inf

    @property
    def anisotropy_ratio(self) -> float:
        return self.lhs / self.isotropic_lhs if self.isotropic_lhs > 0.0 else math.nan


def static_degenerate_coercivity(
    psi0_spec: LineMeasure,
    h: Probe,
    band: Band,
    R: float,
    grid: SpectralGrid,
    kernel: AngularKernel,
    quad: SphereQuadrature | None = None,
    *,
    logger: Logger | None = None,
    workers: int | None = None,
) -> StaticCoercivity:
    """
    Degenerate coercivity of a line measure with the weight (|ξ_⊥|² + |ξ_∥|)^s on |ξ| ≥ R.

    ξ_∥ is the component along the line direction. ``band`` enters only
    ``kappa``, the gap min(1 − |ψ₀|) over its nodes. lhs sums over ball nodes
    with |ξ| ≥ R and rhs over the whole ball, so neither depends on it.

    Raises:
        ValueError: If the line measure is a single Dirac mass.
    """
    if psi0_spec.is_single_dirac():
        raise ValueError("Static degenerate coercivity needs at least two distinct atoms; a single Dirac has no gap")
    field = CharField.from_measure(psi0_spec, grid)
    mask = grid.ball_mask & (grid.radii >= R)
    nodes = grid.nodes[mask]
    weight = numpy.abs(numpy.asarray(h(nodes))) ** 2 * grid.spacing ** 3
    parallel = nodes @ psi0_spec.direction
    perpendicular_sq = numpy.sum(nodes ** 2, axis=-1) - parallel ** 2
    anisotropic = (numpy.clip(perpendicular_sq, 0.0, None) + numpy.abs(parallel)) ** kernel.s

    gap = collision_gap(field, kernel, quad, logger=logger, workers=workers)
    band_nodes = grid.ball_mask & band.contains(grid.nodes)
    kappa = float((1.0 - numpy.abs(field.values[band_nodes])).min()) if numpy.any(band_nodes) else math.nan
    return StaticCoercivity(
        lhs=float(numpy.sum(anisotropic * weight)),
        rhs=float(numpy.sum(gap[grid.ball_mask] * numpy.abs(numpy.asarray(h(grid.nodes[grid.ball_mask]))) ** 2)
                  * grid.spacing ** 3),
        isotropic_lhs=float(numpy.sum(_japanese(nodes) ** (2.0 * kernel.s) * weight)),
        kappa=kappa,
    )
