"""Frequency regions on which pointwise gaps and coercivity are measured."""

import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass
from typing import Any, ClassVar

import numpy

_regions: dict[str, type["RegionSpec"]] = {}


def region(name: str) -> Callable[[type["RegionSpec"]], type["RegionSpec"]]:
    """Register a RegionSpec subclass under its JSON variant tag."""

    def decorator(cls: type["RegionSpec"]) -> type["RegionSpec"]:
        cls.variant_name = name
        _regions[name] = cls
        return cls

    return decorator


def region_from_data(data: dict[str, Any]) -> "RegionSpec":
    tag = data.get("variant")
    if tag not in _regions:
        raise ValueError(f"Unknown region variant {tag!r}; expected one of: {', '.join(sorted(_regions))}")
    fields = {key: value for key, value in data.items() if key != "variant"}
    for key in ("axis", "omega"):
        if key in fields:
            fields[key] = tuple(float(c) for c in fields[key])
    return _regions[tag](**fields)


def _unit(vector: Sequence[float], name: str) -> tuple[float, float, float]:
    array = numpy.asarray(vector, dtype=float).reshape(3)
    norm = float(numpy.linalg.norm(array))
    if norm == 0.0:
        raise ValueError(f"{name} must be a nonzero vector")
    return tuple(float(c) for c in array / norm)


def _split(points: numpy.ndarray) -> tuple[numpy.ndarray, numpy.ndarray]:
    points = numpy.asarray(points, dtype=float)
    radius = numpy.linalg.norm(points, axis=-1)
    safe = numpy.where(radius > 0.0, radius, 1.0)
    return radius, points / safe[..., None]


class RegionSpec(ABC):
    """Pure membership predicate on frequency points of shape (..., 3)."""

    variant_name: ClassVar[str] = ""

    @abstractmethod
    def contains(self, points: numpy.ndarray) -> numpy.ndarray:
        """Boolean mask of points inside the region."""

    def to_data(self) -> dict[str, Any]:
        data = asdict(self)  # type: ignore[call-overload]
        return {"variant": self.variant_name, **{k: list(v) if isinstance(v, tuple) else v for k, v in data.items()}}


@region("AnnulusDisk")
@dataclass(frozen=True)
class AnnulusDisk(RegionSpec):
    """Shell d − μ ≤ |η| ≤ d + μ restricted to directions within ε of the plane orthogonal to ``axis``."""

    d: float
    mu: float
    epsilon: float
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self) -> None:
        if not (self.d > 0.0 and self.mu > 0.0 and self.epsilon > 0.0):
            raise ValueError("AnnulusDisk requires positive d, mu and epsilon")
        object.__setattr__(self, "axis", _unit(self.axis, "AnnulusDisk axis"))

    @classmethod
    def for_atoms(
        cls, b2: Sequence[float], b3: Sequence[float], *, mu_fraction: float = 0.25, epsilon: float = 0.25
    ) -> "AnnulusDisk":
        """Region for atoms at 0, b₂, b₃: axis b₂ × b₃ and radius d = π/(2 max|bᵢ|)."""
        b2_array, b3_array = numpy.asarray(b2, dtype=float), numpy.asarray(b3, dtype=float)
        normal = numpy.cross(b2_array, b3_array)
        if numpy.linalg.norm(normal) <= 1e-12:
            raise ValueError("b2 and b3 must be linearly independent")
        d = 0.5 * math.pi / max(float(numpy.linalg.norm(b2_array)), float(numpy.linalg.norm(b3_array)))
        return cls(d=d, mu=mu_fraction * d, epsilon=epsilon, axis=tuple(float(c) for c in normal))

    def contains(self, points: numpy.ndarray) -> numpy.ndarray:
        radius, direction = _split(points)
        tilt = numpy.abs(direction @ numpy.asarray(self.axis))
        return (radius > 0.0) & (radius >= self.d - self.mu) & (radius <= self.d + self.mu) & (tilt <= self.epsilon)


@region("PolarCap")
@dataclass(frozen=True)
class PolarCap(RegionSpec):
    """|ξ| ≥ R₀ with |1 − |ξ/|ξ|·axis|| ≤ 2ε²/π² (directions close to ±axis)."""

    R0: float
    epsilon: float
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self) -> None:
        if not (self.R0 > 0.0 and self.epsilon > 0.0):
            raise ValueError("PolarCap requires positive R0 and epsilon")
        object.__setattr__(self, "axis", _unit(self.axis, "PolarCap axis"))

    def contains(self, points: numpy.ndarray) -> numpy.ndarray:
        radius, direction = _split(points)
        alignment = numpy.abs(direction @ numpy.asarray(self.axis))
        return (radius >= self.R0) & (numpy.abs(1.0 - alignment) <= 2.0 * self.epsilon ** 2 / math.pi ** 2)


@region("Cone")
@dataclass(frozen=True)
class Cone(RegionSpec):
    """|ξ| ≥ R with |ξ/|ξ| − ω| ≤ ε."""

    omega: tuple[float, float, float]
    epsilon: float
    R: float

    def __post_init__(self) -> None:
        if not (self.epsilon > 0.0 and self.R > 0.0):
            raise ValueError("Cone requires positive epsilon and R")
        object.__setattr__(self, "omega", _unit(self.omega, "Cone direction"))

    def contains(self, points: numpy.ndarray) -> numpy.ndarray:
        radius, direction = _split(points)
        spread = numpy.linalg.norm(direction - numpy.asarray(self.omega), axis=-1)
        return (radius >= self.R) & (spread <= self.epsilon)


@region("Band")
@dataclass(frozen=True)
class Band(RegionSpec):
    """Slab a₁ ≤ |ξ·axis| ≤ a₂."""

    a1: float
    a2: float
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self) -> None:
        if not 0.0 < self.a1 < self.a2:
            raise ValueError(f"Band requires 0 < a1 < a2, got ({self.a1}, {self.a2})")
        object.__setattr__(self, "axis", _unit(self.axis, "Band axis"))

    def contains(self, points: numpy.ndarray) -> numpy.ndarray:
        height = numpy.abs(numpy.asarray(points, dtype=float) @ numpy.asarray(self.axis))
        return (height >= self.a1) & (height <= self.a2)
