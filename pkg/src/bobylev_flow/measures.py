"""
Probability-measure initial data, their characteristic functions and the
𝒦^α distances between characteristic functions.

A :class:`MeasureSpec` variant is registered under the name used in the JSON
``"variant"`` tag by the :func:`variant` decorator; :func:`measure_from_data`
rebuilds any registered variant from its JSON form.
"""

import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, ClassVar

import numpy
from numpy.polynomial.hermite_e import hermegauss
from scipy import fft

from bobylev_flow.constants import HERMITE_NODES, TABULATED_MASS_TOLERANCE, TABULATED_PAD_FACTOR
from bobylev_flow.grid import tricubic

if TYPE_CHECKING:
    from bobylev_flow.grid import SpectralGrid

_variants: dict[str, type["MeasureSpec"]] = {}


def variant(name: str) -> Callable[[type["MeasureSpec"]], type["MeasureSpec"]]:
    """Register a MeasureSpec subclass under its JSON variant tag."""

    def decorator(cls: type["MeasureSpec"]) -> type["MeasureSpec"]:
        if not issubclass(cls, MeasureSpec):
            raise TypeError("@variant can only decorate MeasureSpec subclasses")
        cls.variant_name = name
        _variants[name] = cls
        return cls

    return decorator


def available_variants() -> list[str]:
    return sorted(_variants)


def measure_from_data(data: dict[str, Any]) -> "MeasureSpec":
    """
    Rebuild a measure from its JSON form.

    Raises:
        ValueError: If the variant tag is missing or unknown, or the payload is invalid.
    """
    tag = data.get("variant")
    if tag not in _variants:
        raise ValueError(
            f"Unknown measure variant {tag!r}; expected one of: {', '.join(available_variants())}"
        )
    return _variants[tag].from_data(data)


def _as_points(xi: Any) -> tuple[numpy.ndarray, tuple[int, ...]]:
    """Flatten ξ arguments of shape (..., 3) to (M, 3), returning the leading shape."""
    points = numpy.asarray(xi, dtype=float)
    if points.shape[-1:] != (3,):
        raise ValueError(f"Frequency points must have a trailing dimension of 3, got shape {points.shape}")
    return points.reshape(-1, 3), points.shape[:-1]


def _shaped(values: numpy.ndarray, shape: tuple[int, ...]) -> numpy.ndarray | complex:
    return complex(values[0]) if shape == () else values.reshape(shape)


def _phase_minus_one(phase: numpy.ndarray) -> numpy.ndarray:
    """e^{−iφ} − 1 without cancellation for small φ."""
    return -2.0 * numpy.sin(0.5 * phase) ** 2 - 1j * numpy.sin(phase)


def _complex_expm1(z: numpy.ndarray) -> numpy.ndarray:
    """e^z − 1 for complex z without cancellation near 0."""
    re, im = z.real, z.imag
    return numpy.expm1(re) * numpy.cos(im) - 2.0 * numpy.sin(0.5 * im) ** 2 + 1j * numpy.exp(re) * numpy.sin(im)


def _check_weights(weights: numpy.ndarray) -> None:
    if weights.ndim != 1 or weights.size == 0:
        raise ValueError("A measure needs at least one weight")
    if not numpy.all(numpy.isfinite(weights)) or numpy.any(weights < 0.0):
        raise ValueError("Measure weights must be finite and nonnegative")
    if abs(float(weights.sum()) - 1.0) > 1e-9:
        raise ValueError(f"Measure weights must sum to 1, got {float(weights.sum()):.12g}")


def _distinct_count(points: numpy.ndarray) -> int:
    return int(numpy.unique(numpy.round(points, 12), axis=0).shape[0]) if points.size else 0


class MeasureSpec(ABC):
    """Symbolic description of a probability measure on ℝ³."""

    variant_name: ClassVar[str] = ""
    # True when the characteristic function is evaluated in closed form
    symbolic: ClassVar[bool] = True

    @abstractmethod
    def characteristic(self, xi: Any) -> numpy.ndarray | complex:
        """ψ(ξ) = ∫ e^{−iv·ξ} dΨ(v) for points of shape (..., 3)."""

    def characteristic_minus_one(self, xi: Any) -> numpy.ndarray | complex:
        """ψ(ξ) − 1, accurate when ψ is close to 1."""
        return self.characteristic(xi) - 1.0

    @abstractmethod
    def mean(self) -> numpy.ndarray:
        """First moment ∫ v dΨ."""

    @abstractmethod
    def second_moment_matrix(self) -> numpy.ndarray:
        """∫ v vᵀ dΨ."""

    @abstractmethod
    def expectation(self, function: Callable[[numpy.ndarray], numpy.ndarray]) -> float:
        """∫ g(v) dΨ(v) for a vectorized g mapping points (M, 3) to values (M,)."""

    def absolute_moment(self, alpha: float) -> float:
        """∫ |v|^α dΨ."""
        return self.expectation(lambda v: numpy.linalg.norm(v, axis=-1) ** alpha)

    @abstractmethod
    def is_single_dirac(self) -> bool:
        """True when the measure is one point mass."""

    @abstractmethod
    def shifted(self, offset: Sequence[float]) -> "MeasureSpec":
        """The measure translated by ``offset``."""

    @abstractmethod
    def to_data(self) -> dict[str, Any]:
        """JSON form including the ``variant`` tag."""

    @classmethod
    @abstractmethod
    def from_data(cls, data: dict[str, Any]) -> "MeasureSpec":
        """Inverse of :meth:`to_data`."""

    def energy(self) -> float:
        return float(numpy.trace(self.second_moment_matrix()))


@variant("DiracSum")
@dataclass(frozen=True, eq=False)
class DiracSum(MeasureSpec):
    """Finite sum of point masses Σ mᵢ δ_{bᵢ}."""

    weights: numpy.ndarray
    locations: numpy.ndarray

    def __post_init__(self) -> None:
        weights = numpy.asarray(self.weights, dtype=float).reshape(-1)
        locations = numpy.asarray(self.locations, dtype=float).reshape(-1, 3)
        if locations.shape[0] != weights.shape[0]:
            raise ValueError("DiracSum needs one location per weight")
        _check_weights(weights)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "locations", locations)

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, Sequence[float]]]) -> "DiracSum":
        pairs = list(atoms)
        return cls(
            weights=numpy.array([weight for weight, _ in pairs], dtype=float),
            locations=numpy.array([location for _, location in pairs], dtype=float),
        )

    def characteristic(self, xi: Any) -> numpy.ndarray | complex:
        points, shape = _as_points(xi)
        phase = points @ self.locations.T
        return _shaped(numpy.exp(-1j * phase) @ self.weights, shape)

    def characteristic_minus_one(self, xi: Any) -> numpy.ndarray | complex:
        points, shape = _as_points(xi)
        return _shaped(_phase_minus_one(points @ self.locations.T) @ self.weights, shape)

    def mean(self) -> numpy.ndarray:
        return self.weights @ self.locations

    def second_moment_matrix(self) -> numpy.ndarray:
        return numpy.einsum("m,mi,mj->ij", self.weights, self.locations, self.locations)

    def expectation(self, function: Callable[[numpy.ndarray], numpy.ndarray]) -> float:
        return float(self.weights @ numpy.asarray(function(self.locations), dtype=float))

    def is_single_dirac(self) -> bool:
        return _distinct_count(self.locations[self.weights > 0.0]) <= 1

    def shifted(self, offset: Sequence[float]) -> "DiracSum":
        return DiracSum(self.weights, self.locations + numpy.asarray(offset, dtype=float))

    def to_data(self) -> dict[str, Any]:
        return {
            "variant": self.variant_name,
            "atoms": [[float(w), [float(c) for c in b]] for w, b in zip(self.weights, self.locations)],
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "DiracSum":
        atoms = data.get("atoms")
        if not isinstance(atoms, list) or not atoms:
            raise ValueError("DiracSum requires a non-empty 'atoms' list of [weight, [x, y, z]]")
        return cls.from_atoms((float(w), b) for w, b in atoms)


@variant("LineMeasure")
@dataclass(frozen=True, eq=False)
class LineMeasure(MeasureSpec):
    """Point masses on the line through the origin along ``direction``: Σ wᵢ δ_{oᵢ d}."""

    direction: numpy.ndarray
    offsets: numpy.ndarray
    weights: numpy.ndarray

    def __post_init__(self) -> None:
        direction = numpy.asarray(self.direction, dtype=float).reshape(3)
        norm = float(numpy.linalg.norm(direction))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"LineMeasure direction must be a unit vector, got norm {norm:.12g}")
        offsets = numpy.asarray(self.offsets, dtype=float).reshape(-1)
        weights = numpy.asarray(self.weights, dtype=float).reshape(-1)
        if offsets.shape != weights.shape:
            raise ValueError("LineMeasure needs one offset per weight")
        _check_weights(weights)
        object.__setattr__(self, "direction", direction / norm)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_atoms(cls, direction: Sequence[float], atoms: Iterable[tuple[float, float]]) -> "LineMeasure":
        pairs = list(atoms)
        return cls(
            direction=numpy.asarray(direction, dtype=float),
            offsets=numpy.array([offset for _, offset in pairs], dtype=float),
            weights=numpy.array([weight for weight, _ in pairs], dtype=float),
        )

    @property
    def locations(self) -> numpy.ndarray:
        return self.offsets[:, None] * self.direction[None, :]

    def characteristic(self, xi: Any) -> numpy.ndarray | complex:
        points, shape = _as_points(xi)
        phase = numpy.outer(points @ self.direction, self.offsets)
        return _shaped(numpy.exp(-1j * phase) @ self.weights, shape)

    def characteristic_minus_one(self, xi: Any) -> numpy.ndarray | complex:
        points, shape = _as_points(xi)
        phase = numpy.outer(points @ self.direction, self.offsets)
        return _shaped(_phase_minus_one(phase) @ self.weights, shape)

    def mean(self) -> numpy.ndarray:
        return float(self.weights @ self.offsets) * self.direction

    def second_moment_matrix(self) -> numpy.ndarray:
        return float(self.weights @ self.offsets ** 2) * numpy.outer(self.direction, self.direction)

    def expectation(self, function: Callable[[numpy.ndarray], numpy.ndarray]) -> float:
        return float(self.weights @ numpy.asarray(function(self.locations), dtype=float))

    def is_single_dirac(self) -> bool:
        return _distinct_count(self.offsets[self.weights > 0.0].reshape(-1, 1)) <= 1

    def shifted(self, offset: Sequence[float]) -> MeasureSpec:
        shift = numpy.asarray(offset, dtype=float)
        along = float(shift @ self.direction)
        if numpy.linalg.norm(shift - along * self.direction) <= 1e-12:
            return LineMeasure(self.direction, self.offsets + along, self.weights)
        return DiracSum(self.weights, self.locations + shift)

    def to_data(self) -> dict[str, Any]:
        return {
            "variant": self.variant_name,
            "direction": [float(c) for c in self.direction],
            "atoms": [[float(w), float(o)] for w, o in zip(self.weights, self.offsets)],
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "LineMeasure":
        atoms = data.get("atoms")
        if not isinstance(atoms, list) or not atoms:
            raise ValueError("LineMeasure requires a non-empty 'atoms' list of [weight, offset]")
        return cls.from_atoms(data.get("direction", [0.0, 0.0, 1.0]), ((float(w), float(o)) for w, o in atoms))


@variant("GaussianMixture")
@dataclass(frozen=True, eq=False)
class GaussianMixture(MeasureSpec):
    """Mixture Σ wᵢ N(μᵢ, Σᵢ) with positive semidefinite covariances."""

    weights: numpy.ndarray
    means: numpy.ndarray
    covariances: numpy.ndarray

    def __post_init__(self) -> None:
        weights = numpy.asarray(self.weights, dtype=float).reshape(-1)
        means = numpy.asarray(self.means, dtype=float).reshape(-1, 3)
        covariances = numpy.asarray(self.covariances, dtype=float).reshape(-1, 3, 3)
        if not (weights.shape[0] == means.shape[0] == covariances.shape[0]):
            raise ValueError("GaussianMixture needs one mean and one covariance per weight")
        _check_weights(weights)
        scale = max(1.0, float(numpy.abs(covariances).max()))
        if numpy.abs(covariances - covariances.transpose(0, 2, 1)).max() > 1e-12 * scale:
            raise ValueError("GaussianMixture covariances must be symmetric")
        if numpy.linalg.eigvalsh(covariances).min() < -1e-12 * scale:
            raise ValueError("GaussianMixture covariances must be positive semidefinite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covariances)

    @classmethod
    def standard(cls) -> "GaussianMixture":
        """The standard normal N(0, I), whose characteristic function is e^{−|ξ|²/2}."""
        return cls(numpy.ones(1), numpy.zeros((1, 3)), numpy.eye(3)[None, :, :])

    def _exponent(self, points: numpy.ndarray) -> numpy.ndarray:
        quadratic = numpy.einsum("pi,mij,pj->pm", points, self.covariances, points)
        return -0.5 * quadratic - 1j * (points @ self.means.T)

    def characteristic(self, xi: Any) -> numpy.ndarray | complex:
        points, shape = _as_points(xi)
        return _shaped(numpy.exp(self._exponent(points)) @ self.weights, shape)

    def characteristic_minus_one(self, xi: Any) -> numpy.ndarray | complex:
        points, shape = _as_points(xi)
        return _shaped(_complex_expm1(self._exponent(points)) @ self.weights, shape)

    def mean(self) -> numpy.ndarray:
        return self.weights @ self.means

    def second_moment_matrix(self) -> numpy.ndarray:
        outer = numpy.einsum("mi,mj->mij", self.means, self.means)
        return numpy.einsum("m,mij->ij", self.weights, self.covariances + outer)

    def absolute_moment(self, alpha: float) -> float:
        if alpha == 2.0:
            return self.energy()
        return super().absolute_moment(alpha)

    def expectation(self, function: Callable[[numpy.ndarray], numpy.ndarray]) -> float:
        # tensor Gauss-Hermite rule for E g(mu + L z), z ~ N(0, I)
        nodes, node_weights = hermegauss(HERMITE_NODES)
        node_weights = node_weights / math.sqrt(2.0 * math.pi)
        z = numpy.stack(numpy.meshgrid(nodes, nodes, nodes, indexing="ij"), axis=-1).reshape(-1, 3)
        zw = numpy.einsum("i,j,k->ijk", node_weights, node_weights, node_weights).reshape(-1)
        total = 0.0
        for weight, mu, cov in zip(self.weights, self.means, self.covariances):
            values, vectors = numpy.linalg.eigh(cov)
            factor = vectors * numpy.sqrt(numpy.clip(values, 0.0, None))[None, :]
            samples = mu[None, :] + z @ factor.T
            total += weight * float(zw @ numpy.asarray(function(samples), dtype=float))
        return total

    def is_single_dirac(self) -> bool:
        active = self.weights > 0.0
        return bool(numpy.abs(self.covariances[active]).max() <= 1e-15) and _distinct_count(self.means[active]) <= 1

    def shifted(self, offset: Sequence[float]) -> "GaussianMixture":
        return GaussianMixture(self.weights, self.means + numpy.asarray(offset, dtype=float), self.covariances)

    def to_data(self) -> dict[str, Any]:
        return {
            "variant": self.variant_name,
            "components": [
                {"weight": float(w), "mean": mu.tolist(), "covariance": cov.tolist()}
                for w, mu, cov in zip(self.weights, self.means, self.covariances)
            ],
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "GaussianMixture":
        components = data.get("components")
        if not isinstance(components, list) or not components:
            raise ValueError("GaussianMixture requires a non-empty 'components' list")
        covariances = []
        for component in components:
            covariance = component.get("covariance", 1.0)
            if isinstance(covariance, (int, float)):
                covariance = float(covariance) * numpy.eye(3)
            covariances.append(numpy.asarray(covariance, dtype=float))
        return cls(
            weights=numpy.array([float(c["weight"]) for c in components]),
            means=numpy.array([c.get("mean", [0.0, 0.0, 0.0]) for c in components], dtype=float),
            covariances=numpy.array(covariances),
        )


@variant("TabulatedDensity")
@dataclass(frozen=True, eq=False)
class TabulatedDensity(MeasureSpec):
    """
    Density f₀ ≥ 0 sampled on the cube [−L, L]³ with n nodes per axis.

    The characteristic function is computed once by a zero-padded discrete
    Fourier transform onto a symmetric frequency lattice and interpolated
    thereafter; frequencies outside that lattice evaluate to 0.
    """

    symbolic: ClassVar[bool] = False

    values: numpy.ndarray
    extent: float
    pad_factor: int = TABULATED_PAD_FACTOR
    _lattice: numpy.ndarray = field(init=False, repr=False)
    _lattice_spacing: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = numpy.asarray(self.values, dtype=float)
        if values.ndim != 3 or len(set(values.shape)) != 1 or values.shape[0] < 4:
            raise ValueError("TabulatedDensity needs a cubic sample with at least 4 nodes per axis")
        if not self.extent > 0.0:
            raise ValueError("TabulatedDensity extent must be positive")
        if self.pad_factor < 1:
            raise ValueError("TabulatedDensity pad_factor must be at least 1")
        if not numpy.all(numpy.isfinite(values)) or numpy.any(values < 0.0):
            raise ValueError("TabulatedDensity values must be finite and nonnegative")
        mass = float(values.sum()) * self.spacing ** 3
        if abs(mass - 1.0) > TABULATED_MASS_TOLERANCE:
            raise ValueError(f"TabulatedDensity must carry unit mass, got {mass:.6g}")
        values = values / mass
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        self._build_transform()

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / (self.values.shape[0] - 1)

    @property
    def velocity_axis(self) -> numpy.ndarray:
        return numpy.linspace(-self.extent, self.extent, self.size)

    @property
    def lattice_extent(self) -> float:
        return 0.5 * (self._lattice.shape[0] - 1) * self._lattice_spacing

    def _build_transform(self) -> None:
        n = self.size
        padded_size = self.pad_factor * n
        if padded_size % 2 == 0:
            padded_size += 1
        padded = numpy.zeros((padded_size,) * 3)
        padded[:n, :n, :n] = self.values
        step = 2.0 * math.pi / (padded_size * self.spacing)
        xi_axis = (numpy.arange(padded_size) - (padded_size - 1) // 2) * step
        phase = numpy.exp(1j * self.extent * xi_axis)
        lattice = fft.fftshift(fft.fftn(padded)) * self.spacing ** 3
        lattice *= phase[:, None, None] * phase[None, :, None] * phase[None, None, :]
        centre = (padded_size - 1) // 2
        lattice[centre, centre, centre] = 1.0
        lattice.setflags(write=False)
        object.__setattr__(self, "_lattice", lattice)
        object.__setattr__(self, "_lattice_spacing", step)

    def lattice(self) -> tuple[numpy.ndarray, float]:
        """Transform values on the symmetric frequency lattice and its spacing."""
        return self._lattice, self._lattice_spacing

    def characteristic(self, xi: Any) -> numpy.ndarray | complex:
        points, shape = _as_points(xi)
        bound = self.lattice_extent
        inside = numpy.all(numpy.abs(points) <= bound * (1.0 + 1e-12), axis=1)
        values = numpy.zeros(points.shape[0], dtype=complex)
        if numpy.any(inside):
            clipped = numpy.clip(points[inside], -bound, bound)
            values[inside] = tricubic(self._lattice, -bound, self._lattice_spacing, clipped)
        return _shaped(values, shape)

    def _velocity_points(self) -> numpy.ndarray:
        axis = self.velocity_axis
        return numpy.stack(numpy.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)

    def mean(self) -> numpy.ndarray:
        return numpy.einsum("ijk,ijkl->l", self.values, self._velocity_points()) * self.spacing ** 3

    def second_moment_matrix(self) -> numpy.ndarray:
        v = self._velocity_points()
        return numpy.einsum("ijk,ijkl,ijkm->lm", self.values, v, v) * self.spacing ** 3

    def expectation(self, function: Callable[[numpy.ndarray], numpy.ndarray]) -> float:
        values = numpy.asarray(function(self._velocity_points().reshape(-1, 3)), dtype=float)
        return float(values @ self.values.reshape(-1)) * self.spacing ** 3

    def is_single_dirac(self) -> bool:
        return int(numpy.count_nonzero(self.values)) <= 1

    def shifted(self, offset: Sequence[float]) -> MeasureSpec:
        raise ValueError("TabulatedDensity cannot be translated; resample the density instead")

    def to_data(self) -> dict[str, Any]:
        return {
            "variant": self.variant_name,
            "extent": self.extent,
            "pad_factor": self.pad_factor,
            "values": self.values.tolist(),
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "TabulatedDensity":
        if "path" in data:
            values = numpy.load(Path(data["path"]))
        elif "values" in data:
            values = numpy.asarray(data["values"], dtype=float)
        else:
            raise ValueError("TabulatedDensity requires 'values' or a 'path' to a .npy file")
        if "extent" not in data:
            raise ValueError("TabulatedDensity requires 'extent'")
        return cls(values=values, extent=float(data["extent"]), pad_factor=int(data.get("pad_factor", TABULATED_PAD_FACTOR)))


def characteristic(measure: MeasureSpec, xi: Any) -> numpy.ndarray | complex:
    """Characteristic function of ``measure`` at ``xi`` (a point or an array of points)."""
    return measure.characteristic(xi)


@dataclass(frozen=True)
class KAlphaNorm:
    """
    Grid approximation of sup_ξ |ψ(ξ) − φ(ξ)| / |ξ|^α.

    ``value`` is the maximum of the grid supremum and the analytic ξ → 0
    limit; ``tail_bound`` = 2/R_max^α bounds the ratio beyond the grid.
    """

    alpha: float
    value: float
    grid_value: float
    origin_limit: float
    tail_bound: float
    argmax: tuple[float, float, float] | None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def _sample_on_grid(obj: Any, grid: "SpectralGrid", mask: numpy.ndarray, points: numpy.ndarray) -> numpy.ndarray:
    if isinstance(obj, MeasureSpec):
        return numpy.asarray(obj.characteristic(points), dtype=complex)
    values = getattr(obj, "values", None)
    if values is not None and getattr(obj, "grid", None) == grid:
        return numpy.asarray(values)[mask]
    if hasattr(obj, "sample"):
        return numpy.asarray(obj.sample(points), dtype=complex)
    if callable(obj):
        return numpy.asarray(obj(points), dtype=complex)
    return numpy.full(points.shape[0], complex(obj))


def _taylor(obj: Any) -> tuple[numpy.ndarray, numpy.ndarray] | None:
    """(mean, second moment matrix) for closed-form data, None otherwise."""
    spec = getattr(obj, "exact", obj)
    if isinstance(spec, MeasureSpec) and spec.symbolic:
        return spec.mean(), spec.second_moment_matrix()
    if isinstance(spec, (int, float, complex)) and spec == 1:
        return numpy.zeros(3), numpy.zeros((3, 3))
    return None


def origin_limit(psi: Any, phi: Any, alpha: float) -> float:
    """lim_{ξ→0} sup over directions of |ψ − φ|/|ξ|^α from the second-order expansions."""
    left, right = _taylor(psi), _taylor(phi)
    if left is None or right is None:
        return 0.0
    mean_gap = float(numpy.linalg.norm(left[0] - right[0]))
    if alpha < 1.0:
        return 0.0
    if alpha == 1.0:
        return mean_gap
    if mean_gap > 1e-14:
        return math.inf
    if alpha < 2.0:
        return 0.0
    return 0.5 * float(numpy.abs(numpy.linalg.eigvalsh(left[1] - right[1])).max())


def kalpha_distance(psi: Any, phi: Any, alpha: float, grid: "SpectralGrid") -> KAlphaNorm:
    """
    𝒦^α distance between two characteristic functions on the grid ball.

    Args:
        psi, phi: MeasureSpec, CharField, vectorized callable, or the constant 1.
        alpha: Exponent in (0, 2].
        grid: Grid whose nonzero ball nodes are scanned.
    Raises:
        ValueError: If alpha lies outside (0, 2].
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"kalpha_distance requires alpha in (0, 2], got {alpha}")
    mask = grid.ball_mask & (grid.radii > 0.0)
    points = grid.nodes[mask]
    difference = numpy.abs(_sample_on_grid(psi, grid, mask, points) - _sample_on_grid(phi, grid, mask, points))
    ratios = difference / grid.radii[mask] ** alpha
    best = int(numpy.argmax(ratios))
    grid_value = float(ratios[best])
    origin = origin_limit(psi, phi, alpha)
    return KAlphaNorm(
        alpha=alpha,
        value=max(grid_value, origin),
        grid_value=grid_value,
        origin_limit=origin,
        tail_bound=2.0 / grid.R_max ** alpha,
        argmax=tuple(float(c) for c in points[best]),
    )


@dataclass(frozen=True)
class MembershipCertificate:
    """Outcome of a 𝒦^α membership test with the quantities it rests on."""

    alpha: float
    member: bool
    moment: float
    mean: tuple[float, float, float]
    norm_bound: float | None
    reason: str

    def __bool__(self) -> bool:
        return self.member


def kalpha_membership(measure: MeasureSpec, alpha: float) -> MembershipCertificate:
    """
    Decide whether ψ of ``measure`` lies in 𝒦^α.

    Membership holds when the α-moment is finite and, for α > 1, the mean
    vanishes. The certificate carries the bound ‖ψ − 1‖_α ≤ 2^{1−α}∫|v|^α
    (α ≤ 1) or 2^{3−2α}∫|v|^α (α > 1).

    Raises:
        ValueError: If alpha lies outside (0, 2] (𝒦^α is trivial above 2).
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"kalpha_membership requires alpha in (0, 2], got {alpha}; K^alpha = {{1}} above 2")
    moment = measure.absolute_moment(alpha)
    mean = measure.mean()
    mean_tuple = (float(mean[0]), float(mean[1]), float(mean[2]))
    if not math.isfinite(moment):
        return MembershipCertificate(alpha, False, moment, mean_tuple, None, "alpha-moment is infinite")
    if alpha > 1.0 and float(numpy.linalg.norm(mean)) > 1e-12:
        return MembershipCertificate(
            alpha, False, moment, mean_tuple, None, f"mean {mean_tuple} must vanish for alpha > 1"
        )
    factor = 2.0 ** (1.0 - alpha) if alpha <= 1.0 else 2.0 ** (3.0 - 2.0 * alpha)
    return MembershipCertificate(alpha, True, moment, mean_tuple, factor * moment, "finite moment")
