"""
Densities recovered from ψ by the inverse discrete transform, and their entropies.

On the N³ lattice ξ_k = (k − c)h the reciprocal velocity lattice has spacing
Δv = 2π/(N h); the full cube (corners included) enters the transform.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy
from scipy import fft

from bobylev_flow.constants import ENTROPY_CLIP_LIMIT
from bobylev_flow.grid import CharField
from common.logger import Logger


@dataclass(frozen=True)
class Density:
    """Velocity density f on the reciprocal lattice."""

    values: numpy.ndarray
    spacing: float

    @property
    def axis(self) -> numpy.ndarray:
        n = self.values.shape[0]
        return (numpy.arange(n) - n // 2) * self.spacing

    @property
    def cell(self) -> float:
        return self.spacing ** 3

    def velocities(self) -> numpy.ndarray:
        axis = self.axis
        return numpy.stack(numpy.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)


def density(field: CharField) -> Density:
    """f(v_j) = (h/2π)³ Σ_k e^{i v_j·ξ_k} ψ(ξ_k), real part."""
    grid = field.grid
    scale = (grid.spacing / (2.0 * math.pi)) ** 3 * grid.N ** 3
    values = scale * fft.fftshift(fft.ifftn(fft.ifftshift(field.values))).real
    return Density(values=values, spacing=2.0 * math.pi / (grid.N * grid.spacing))


@dataclass(frozen=True)
class EntropyResult:
    """
    L = ∫ f log(1 + f) and H = ∫ f log f over the positive part.

    ``clipped_fraction`` is the clipped negative mass relative to the positive mass.
    """

    t: float
    L: float
    H: float
    clipped_fraction: float

    @property
    def reliable(self) -> bool:
        return self.clipped_fraction <= ENTROPY_CLIP_LIMIT and math.isfinite(self.L)


def entropy(field: CharField, *, logger: Logger | None = None) -> EntropyResult:
    """Entropy functionals of the density behind ``field``; negative parts are clipped at 0."""
    f = density(field)
    positive = numpy.clip(f.values, 0.0, None)
    positive_mass = float(positive.sum() * f.cell)
    clipped = float(numpy.clip(-f.values, 0.0, None).sum() * f.cell)
    fraction = clipped / positive_mass if positive_mass > 0.0 else math.inf
    support = positive > 0.0
    result = EntropyResult(
        t=field.time,
        L=float(numpy.sum(positive * numpy.log1p(positive)) * f.cell),
        H=float(numpy.sum(positive[support] * numpy.log(positive[support])) * f.cell),
        clipped_fraction=fraction,
    )
    if logger is not None and not result.reliable:
        logger.warning(
            f"Entropy at t = {field.time:g} unreliable: clipped mass {fraction:.2%} exceeds "
            f"{ENTROPY_CLIP_LIMIT:.0%} (no smooth density yet)"
        )
    return result


def h_trend(results: Sequence[EntropyResult], tolerance: float = 1e-3) -> bool:
    """True when H does not increase by more than ``tolerance`` between consecutive times."""
    ordered = sorted(results, key=lambda result: result.t)
    return all(b.H <= a.H + tolerance for a, b in zip(ordered, ordered[1:], strict=False))
