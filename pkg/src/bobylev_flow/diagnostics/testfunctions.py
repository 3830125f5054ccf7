"""
Fixed family of probe functions h used by the coercivity certificates.

Each probe is a real, vectorized function of ξ (points of shape (..., 3)).
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy

ISOTROPIC_WIDTHS: tuple[float, ...] = (2.0, 4.0, 8.0)


@dataclass(frozen=True)
class ProbeFunction:
    """
    Gaussian-type probe.

    Attributes:
        name: Label used in reports.
        kind: ``"isotropic"``, ``"axis"`` or ``"annular"``.
        width: Gaussian width w.
        centre: Centre point (axis probes) or shell radius (annular probes).
    """

    name: str
    kind: str
    width: float
    centre: tuple[float, ...] = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self) -> None:
        if self.kind not in ("isotropic", "axis", "annular"):
            raise ValueError(f"Unknown probe kind {self.kind!r}")
        if not self.width > 0.0:
            raise ValueError(f"Probe width must be positive, got {self.width}")

    def __call__(self, points: numpy.ndarray) -> numpy.ndarray:
        points = numpy.asarray(points, dtype=float)
        if self.kind == "isotropic":
            squared = numpy.sum(points ** 2, axis=-1)
        elif self.kind == "axis":
            squared = numpy.sum((points - numpy.asarray(self.centre)) ** 2, axis=-1)
        else:
            squared = (numpy.linalg.norm(points, axis=-1) - self.centre[0]) ** 2
        return numpy.exp(-0.5 * squared / self.width ** 2)

    def describe(self) -> dict[str, Any]:
        return {"name": self.name, "kind": self.kind, "width": self.width, "centre": list(self.centre)}


def isotropic_gaussian(width: float) -> ProbeFunction:
    """h(ξ) = exp(−|ξ|²/(2w²))."""
    return ProbeFunction(name=f"isotropic-w{width:g}", kind="isotropic", width=width)


def axis_gaussian(axis: Sequence[float], distance: float, width: float) -> ProbeFunction:
    """Gaussian of width w centred at ``distance``·axis."""
    direction = numpy.asarray(axis, dtype=float)
    direction = direction / numpy.linalg.norm(direction)
    centre = tuple(float(c) for c in distance * direction)
    return ProbeFunction(name=f"axis-{distance:g}-w{width:g}", kind="axis", width=width, centre=centre)


def annular_bump(radius: float, width: float) -> ProbeFunction:
    """exp(−(|ξ| − r)²/(2w²))."""
    return ProbeFunction(name=f"annulus-r{radius:g}-w{width:g}", kind="annular", width=width, centre=(radius,))


def default_family(R_max: float, axis: Sequence[float] = (0.0, 0.0, 1.0)) -> list[ProbeFunction]:
    """Isotropic Gaussians of widths 2, 4, 8, two axis Gaussians and two annular bumps."""
    family = [isotropic_gaussian(width) for width in ISOTROPIC_WIDTHS]
    family.append(axis_gaussian(axis, 0.5 * R_max, 0.125 * R_max))
    orthogonal = numpy.cross(numpy.asarray(axis, dtype=float), numpy.array([1.0, 0.0, 0.0]))
    if numpy.linalg.norm(orthogonal) < 1e-12:
        orthogonal = numpy.cross(numpy.asarray(axis, dtype=float), numpy.array([0.0, 1.0, 0.0]))
    family.append(axis_gaussian(orthogonal, 0.5 * R_max, 0.125 * R_max))
    family.append(annular_bump(0.5 * R_max, 0.0625 * R_max))
    family.append(annular_bump(0.75 * R_max, 0.0625 * R_max))
    return family
