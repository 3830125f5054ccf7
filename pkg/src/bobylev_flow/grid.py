"""
Cartesian spectral grid, characteristic-function samples and off-grid evaluation.

Off-grid values come from tensor-product 4-point Lagrange interpolation on
the uniform lattice (fourth order). One layer of ghost nodes is added on
every face by cubic extrapolation so the stencil is centred up to the
boundary.
"""

import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy

from bobylev_flow.constants import BALL_TOLERANCE, DEFAULT_N, DEFAULT_R_MAX, INTERPOLATION_BLOCK
from common.constants import FIELD_FORMAT_VERSION, FIELD_HEADER_FORMAT, FIELD_MAGIC

if TYPE_CHECKING:
    from bobylev_flow.measures import MeasureSpec


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform cube [−R_max, R_max]³ with N nodes per axis (N odd, origin is a node)."""

    R_max: float = DEFAULT_R_MAX
    N: int = DEFAULT_N

    def __post_init__(self) -> None:
        if not self.R_max > 0.0:
            raise ValueError(f"R_max must be positive, got {self.R_max}")
        if self.N < 3 or self.N % 2 == 0:
            raise ValueError(f"N must be odd and at least 3 so the origin is a node, got {self.N}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.R_max / (self.N - 1)

    @property
    def centre(self) -> int:
        return (self.N - 1) // 2

    @property
    def origin_index(self) -> tuple[int, int, int]:
        return (self.centre,) * 3

    @cached_property
    def axis(self) -> numpy.ndarray:
        return -self.R_max + self.spacing * numpy.arange(self.N)

    @cached_property
    def nodes(self) -> numpy.ndarray:
        """Node coordinates, shape (N, N, N, 3), first index along ξ₁."""
        nodes = numpy.stack(numpy.meshgrid(self.axis, self.axis, self.axis, indexing="ij"), axis=-1)
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def radii(self) -> numpy.ndarray:
        radii = numpy.linalg.norm(self.nodes, axis=-1)
        radii.setflags(write=False)
        return radii

    @cached_property
    def ball_mask(self) -> numpy.ndarray:
        """Nodes with |ξ| ≤ R_max."""
        mask = self.radii <= self.R_max * (1.0 + BALL_TOLERANCE)
        mask.setflags(write=False)
        return mask

    def contains(self, points: numpy.ndarray) -> numpy.ndarray:
        return numpy.linalg.norm(points, axis=-1) <= self.R_max * (1.0 + BALL_TOLERANCE)

    def describe(self) -> dict[str, Any]:
        return {"R_max": self.R_max, "N": self.N, "spacing": self.spacing, "ball_nodes": int(self.ball_mask.sum())}


def _lagrange_weights(t: numpy.ndarray) -> numpy.ndarray:
    """Cubic Lagrange weights for nodes −1, 0, 1, 2 at offsets t ∈ [0, 1]; shape (..., 4)."""
    return numpy.stack(
        (
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        ),
        axis=-1,
    )


def _pad_axis(values: numpy.ndarray, axis: int) -> numpy.ndarray:
    moved = numpy.moveaxis(values, axis, 0)
    if moved.shape[0] >= 5:
        low = 4.0 * moved[0] - 6.0 * moved[1] + 4.0 * moved[2] - moved[3]
        high = 4.0 * moved[-1] - 6.0 * moved[-2] + 4.0 * moved[-3] - moved[-4]
    else:
        low = 2.0 * moved[0] - moved[1]
        high = 2.0 * moved[-1] - moved[-2]
    return numpy.moveaxis(numpy.concatenate((low[None], moved, high[None])), 0, axis)


class TricubicInterpolator:
    """
    Fourth-order interpolation of a cubic lattice of samples.

    Args:
        values: Array of shape (n, n, n), first index along the first coordinate.
        lower: Coordinate of node 0 on every axis.
        spacing: Node spacing.
    """

    def __init__(self, values: numpy.ndarray, lower: float, spacing: float):
        values = numpy.asarray(values)
        if values.ndim != 3 or len(set(values.shape)) != 1 or values.shape[0] < 3:
            raise ValueError(f"Interpolation needs a cubic lattice with at least 3 nodes per axis, got {values.shape}")
        self._size = values.shape[0]
        self._lower = float(lower)
        self._spacing = float(spacing)
        padded = values
        for axis in range(3):
            padded = _pad_axis(padded, axis)
        self._flat = numpy.ascontiguousarray(padded).ravel()
        width = self._size + 2
        self._strides = numpy.array([width * width, width, 1])
        stencil = numpy.arange(4)
        self._offsets = (
            stencil[:, None, None] * self._strides[0]
            + stencil[None, :, None] * self._strides[1]
            + stencil[None, None, :] * self._strides[2]
        ).ravel()

    def __call__(self, points: numpy.ndarray) -> numpy.ndarray:
        points = numpy.asarray(points, dtype=float)
        shape = points.shape[:-1]
        flat_points = points.reshape(-1, 3)
        result = numpy.empty(flat_points.shape[0], dtype=self._flat.dtype)
        for start in range(0, flat_points.shape[0], INTERPOLATION_BLOCK):
            stop = start + INTERPOLATION_BLOCK
            result[start:stop] = self._evaluate(flat_points[start:stop])
        return result.reshape(shape)

    def _evaluate(self, points: numpy.ndarray) -> numpy.ndarray:
        u = (points - self._lower) / self._spacing
        cell = numpy.clip(numpy.floor(u).astype(numpy.int64), 0, self._size - 2)
        weights = _lagrange_weights(u - cell)
        # padded index of stencil node −1 equals the unpadded cell index
        base = cell @ self._strides
        samples = self._flat[base[:, None] + self._offsets[None, :]]
        tensor = numpy.einsum("ma,mb,mc->mabc", weights[:, 0], weights[:, 1], weights[:, 2]).reshape(-1, 64)
        return numpy.sum(samples * tensor, axis=1)


def tricubic(values: numpy.ndarray, lower: float, spacing: float, points: numpy.ndarray) -> numpy.ndarray:
    """One-shot :class:`TricubicInterpolator` evaluation."""
    return TricubicInterpolator(values, lower, spacing)(points)


@dataclass(frozen=True, eq=False)
class CharField:
    """
    Samples of ψ(t, ·) on a spectral grid.

    ``spec`` keeps the closed-form datum a field was sampled from. While
    ``time`` is 0 it is used for off-grid evaluation; fields produced by time
    stepping never carry it.
    """

    grid: SpectralGrid
    values: numpy.ndarray
    time: float = 0.0
    spec: "MeasureSpec | None" = field(default=None, repr=False)

    def __post_init__(self) -> None:
        values = numpy.array(self.values, dtype=complex)
        if values.shape != (self.grid.N,) * 3:
            raise ValueError(f"Field values must have shape {(self.grid.N,) * 3}, got {values.shape}")
        if self.time < 0.0:
            raise ValueError(f"Field time must be nonnegative, got {self.time}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_measure(cls, measure: "MeasureSpec", grid: SpectralGrid) -> "CharField":
        """Sample ψ₀ of ``measure`` on every node; the origin is set to exactly 1."""
        values = numpy.array(measure.characteristic(grid.nodes), dtype=complex)
        values[grid.origin_index] = 1.0
        return cls(grid=grid, values=values, time=0.0, spec=measure)

    @classmethod
    def constant(cls, grid: SpectralGrid, value: complex = 1.0, time: float = 0.0) -> "CharField":
        return cls(grid=grid, values=numpy.full((grid.N,) * 3, value, dtype=complex), time=time)

    def with_values(self, values: numpy.ndarray, time: float) -> "CharField":
        return CharField(grid=self.grid, values=values, time=time)

    def without_spec(self) -> "CharField":
        return CharField(grid=self.grid, values=self.values, time=self.time)

    @property
    def exact(self) -> "MeasureSpec | None":
        """The closed-form datum when this field still represents it, else None."""
        if self.spec is not None and self.time == 0.0 and self.spec.symbolic:
            return self.spec
        return None

    @cached_property
    def _interpolator(self) -> TricubicInterpolator:
        return TricubicInterpolator(self.values, -self.grid.R_max, self.grid.spacing)

    @cached_property
    def _deviation_interpolator(self) -> TricubicInterpolator:
        return TricubicInterpolator(self.values - 1.0, -self.grid.R_max, self.grid.spacing)

    def _check_domain(self, points: numpy.ndarray) -> None:
        if points.size and not numpy.all(self.grid.contains(points)):
            worst = float(numpy.linalg.norm(points, axis=-1).max())
            raise ValueError(f"Interpolation point outside the grid ball: |xi| = {worst:.12g} > R_max = {self.grid.R_max}")

    def sample(self, points: Any) -> numpy.ndarray:
        """ψ at arbitrary points of the ball, shape (..., 3) -> (...)."""
        points = numpy.asarray(points, dtype=float)
        self._check_domain(points)
        exact = self.exact
        if exact is not None:
            return numpy.asarray(exact.characteristic(points), dtype=complex)
        return self._interpolator(points)

    def sample_minus_one(self, points: Any) -> numpy.ndarray:
        """ψ − 1 at arbitrary points, interpolating the deviation so that ψ ≡ 1 gives exact zeros."""
        points = numpy.asarray(points, dtype=float)
        self._check_domain(points)
        exact = self.exact
        if exact is not None:
            return numpy.asarray(exact.characteristic_minus_one(points), dtype=complex)
        return self._deviation_interpolator(points)

    @property
    def origin_value(self) -> complex:
        return complex(self.values[self.grid.origin_index])

    def max_abs(self) -> float:
        return float(numpy.abs(self.values[self.grid.ball_mask]).max())

    def mirrored(self) -> numpy.ndarray:
        """conj ψ(−ξ) on the nodes."""
        return numpy.conj(self.values[::-1, ::-1, ::-1])

    def hermitian_drift(self) -> float:
        """max over the ball of |ψ(ξ) − conj ψ(−ξ)|."""
        return float(numpy.abs(self.values - self.mirrored())[self.grid.ball_mask].max())

    def distance(self, other: "CharField") -> float:
        """Sup-node distance over the ball."""
        if other.grid != self.grid:
            raise ValueError("Fields live on different grids")
        return float(numpy.abs(self.values - other.values)[self.grid.ball_mask].max())


def interpolate(field: CharField, xi: Any) -> numpy.ndarray | complex:
    """
    Value of ``field`` at off-grid points.

    Raises:
        ValueError: If any point lies outside the ball |ξ| ≤ R_max.
    """
    values = field.sample(xi)
    return complex(values) if numpy.ndim(values) == 0 else values


def restrict_to_ball(field: CharField | numpy.ndarray) -> numpy.ndarray:
    """
    Mask of nodes with |ξ| ≤ R_max.

    Accepts a field or a previously computed mask; masking a mask leaves it unchanged.
    """
    if isinstance(field, CharField):
        return numpy.array(field.grid.ball_mask)
    mask = numpy.asarray(field, dtype=bool)
    n = mask.shape[0]
    return mask & SpectralGrid(R_max=1.0, N=n).ball_mask


def write_field(field: CharField, path: Path) -> Path:
    """
    Write ``field`` as a binary dump.

    Layout: 32-byte little-endian header (magic, version, N, reserved, R_max, t)
    followed by interleaved (re, im) doubles with the first index fastest.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = struct.pack(
        FIELD_HEADER_FORMAT, FIELD_MAGIC, FIELD_FORMAT_VERSION, field.grid.N, 0, field.grid.R_max, field.time
    )
    payload = numpy.asarray(field.values.ravel(order="F"), dtype="<c16")
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload.tobytes())
    return path


def read_field(path: Path) -> CharField:
    """
    Read a binary dump written by :func:`write_field`.

    Raises:
        ValueError: On a bad magic, unsupported version or truncated payload.
    """
    data = Path(path).read_bytes()
    header_size = struct.calcsize(FIELD_HEADER_FORMAT)
    if len(data) < header_size:
        raise ValueError(f"{path}: file too short for a field header")
    magic, version, n, _, r_max, time = struct.unpack(FIELD_HEADER_FORMAT, data[:header_size])
    if magic != FIELD_MAGIC:
        raise ValueError(f"{path}: not a field dump (magic {magic!r})")
    if version != FIELD_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported field format version {version}")
    payload = numpy.frombuffer(data, dtype="<c16", offset=header_size)
    if payload.size != n ** 3:
        raise ValueError(f"{path}: expected {n ** 3} values, found {payload.size}")
    values = payload.reshape((n, n, n), order="F")
    return CharField(grid=SpectralGrid(R_max=r_max, N=n), values=values, time=time)
