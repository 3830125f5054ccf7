"""Pointwise gaps 1 − |ψ| on frequency regions and their growth in time."""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy

from bobylev_flow.collision import CollisionOperator, SphereQuadrature
from bobylev_flow.constants import GAP_REFINE_POINTS
from bobylev_flow.diagnostics.regions import AnnulusDisk, Band, RegionSpec
from bobylev_flow.evolution import Trajectory
from bobylev_flow.grid import CharField
from bobylev_flow.kernel import AngularKernel
from common.logger import Logger


@dataclass(frozen=True)
class PointwiseGap:
    """Minimum of 1 − |ψ| over a region and where it is attained."""

    min_gap: float
    argmin: tuple[float, float, float]
    nodes: int


def _region_mask(field: CharField, region: RegionSpec) -> numpy.ndarray:
    grid = field.grid
    mask = grid.ball_mask & region.contains(grid.nodes)
    if not numpy.any(mask):
        raise ValueError(
            f"Region {region.variant_name} contains no node of the {grid.N}^3 grid with R_max = {grid.R_max} "
            f"(spacing {grid.spacing:.4g}); refine the grid or enlarge the region"
        )
    return mask


def _gap(values: numpy.ndarray) -> numpy.ndarray:
    return 1.0 - numpy.abs(values)


def pointwise_gap(field: CharField, region: RegionSpec) -> PointwiseGap:
    """
    min over the region of 1 − |ψ|, refined by interpolation around the discrete argmin.

    The refinement scans a 5×5×5 stencil with a quarter of the grid spacing;
    only stencil points inside the ball and the region are used.

    Raises:
        ValueError: If no grid node falls in the region.
    """
    mask = _region_mask(field, region)
    grid = field.grid
    nodes = grid.nodes[mask]
    gaps = _gap(field.values[mask])
    best = int(numpy.argmin(gaps))
    min_gap, argmin = float(gaps[best]), nodes[best]

    offsets = (numpy.arange(GAP_REFINE_POINTS) - GAP_REFINE_POINTS // 2) * 0.25 * grid.spacing
    stencil = numpy.stack(numpy.meshgrid(offsets, offsets, offsets, indexing="ij"), axis=-1).reshape(-1, 3) + argmin
    stencil = stencil[grid.contains(stencil) & region.contains(stencil)]
    if stencil.size:
        refined = _gap(field.sample(stencil))
        index = int(numpy.argmin(refined))
        if refined[index] < min_gap:
            min_gap, argmin = float(refined[index]), stencil[index]
    return PointwiseGap(min_gap=min_gap, argmin=tuple(float(c) for c in argmin), nodes=int(mask.sum()))


def kappa0_estimate(field: CharField, region: AnnulusDisk) -> float:
    """κ₀ with 1 − |ψ| ≥ κ₀/2 on the annulus region."""
    return 2.0 * pointwise_gap(field, region).min_gap


def kappa_estimate(field: CharField, band: Band) -> float:
    """
    Largest κ with 1 − |ψ(ξ)| ≥ κ min(1, |ξ|²) on the band nodes.

    Raises:
        ValueError: If no grid node falls in the band.
    """
    mask = _region_mask(field, band)
    radii = field.grid.radii[mask]
    return float(numpy.min(_gap(field.values[mask]) / numpy.minimum(1.0, radii ** 2)))


@dataclass(frozen=True)
class GapGrowth:
    """Least-squares slope of min_gap against t."""

    times: tuple[float, ...]
    gaps: tuple[float, ...]
    slope: float
    intercept: float

    @property
    def growing(self) -> bool:
        return self.slope > 0.0


def gap_growth_rate(trajectory: Trajectory, region: RegionSpec, times: Sequence[float]) -> GapGrowth:
    """
    Fit min_gap(t) ≈ c·t + g₀ over the snapshots closest to ``times``.

    Raises:
        ValueError: If fewer than 3 distinct times are given.
    """
    if len(set(times)) < 3:
        raise ValueError(f"gap_growth_rate needs at least 3 distinct times, got {list(times)}")
    snapshots = [trajectory.at(t) for t in sorted(set(times))]
    measured_times = [snapshot.time for snapshot in snapshots]
    if len(set(measured_times)) < 3:
        raise ValueError(f"Trajectory resolves only the times {sorted(set(measured_times))}; record more checkpoints")
    gaps = [pointwise_gap(snapshot, region).min_gap for snapshot in snapshots]
    slope, intercept = numpy.polyfit(numpy.asarray(measured_times), numpy.asarray(gaps), 1)
    return GapGrowth(tuple(measured_times), tuple(gaps), float(slope), float(intercept))


@dataclass(frozen=True)
class GapDerivative:
    """
    ∂t(1 − |ψ|²) = −2 Re(conj ψ · Q) sampled on a region.

    ``c1`` is the smallest rate over the region: near t = 0 the gap grows at
    least like (c1/4)·t wherever it starts at 0.
    """

    c1: float
    mean_rate: float
    nodes: int

    @property
    def positive(self) -> bool:
        return self.c1 > 0.0 and math.isfinite(self.c1)


def gap_time_derivative(
    field: CharField,
    region: RegionSpec,
    kernel: AngularKernel,
    quad: SphereQuadrature | None = None,
    *,
    logger: Logger | None = None,
    workers: int | None = None,
) -> GapDerivative:
    """
    Growth rate of the squared-modulus gap from the collision operator on the region nodes.

    Raises:
        ValueError: If no grid node falls in the region.
    """
    mask = _region_mask(field, region) & (field.grid.radii > 0.0)
    if not numpy.any(mask):
        raise ValueError("Region only contains the origin, where the gap vanishes identically")
    operator = CollisionOperator(logger, kernel, quad, regularized=not kernel.is_cutoff, workers=workers)
    rhs = operator.evaluate_points(field, field.grid.nodes[mask])
    rates = -2.0 * numpy.real(numpy.conj(field.values[mask]) * rhs)
    return GapDerivative(c1=float(rates.min()), mean_rate=float(rates.mean()), nodes=int(mask.sum()))
