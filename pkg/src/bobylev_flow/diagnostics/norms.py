"""
Time-dependent weighted norms, their energy budget and decay of ψ on spheres.

The smoothing weight is M_δ(t, ξ) = ⟨ξ⟩^{Nt²−4} ⟨δξ⟩^{−2N₀} with
N₀ = N·T²/2 + 2, so that M_δ stays bounded on [0, T].
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy

from bobylev_flow.collision import CollisionOperator, SphereQuadrature
from bobylev_flow.constants import DECAY_FLOOR, HOLDER_GRID_N, HOLDER_GRID_R_MAX, HOLDER_SAMPLES, SPHERE_SAMPLES
from bobylev_flow.grid import CharField, SpectralGrid
from bobylev_flow.kernel import AngularKernel, cancellation_constant
from bobylev_flow.measures import MeasureSpec, kalpha_distance, kalpha_membership
from common.logger import Logger


@dataclass(frozen=True)
class WeightSpec:
    """Smoothing weight parameters: rate N, regularizer δ and horizon T."""

    N: int
    delta: float
    T: float

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"Weight rate N must be a positive integer, got {self.N}")
        if not self.delta > 0.0:
            raise ValueError(f"Weight regularizer delta must be positive, got {self.delta}")
        if not self.T > 0.0:
            raise ValueError(f"Weight horizon T must be positive, got {self.T}")

    @property
    def N0(self) -> float:
        return 0.5 * self.N * self.T ** 2 + 2.0

    def exponent(self, t: float) -> float:
        """N t² − 4, defined for t ∈ [0, T]."""
        if not 0.0 <= t <= self.T * (1.0 + 1e-12):
            raise ValueError(f"Weight evaluated at t = {t} outside [0, T = {self.T}]")
        return self.N * t * t - 4.0

    def radial(self, radius: numpy.ndarray, t: float) -> numpy.ndarray:
        """M_δ(t, ·) as a function of |ξ|."""
        squared = numpy.asarray(radius, dtype=float) ** 2
        return (1.0 + squared) ** (0.5 * self.exponent(t)) * (1.0 + self.delta ** 2 * squared) ** (-self.N0)

    def __call__(self, points: numpy.ndarray, t: float) -> numpy.ndarray:
        return self.radial(numpy.linalg.norm(numpy.asarray(points, dtype=float), axis=-1), t)


def weighted_norm(field: CharField, t: float, w: WeightSpec) -> float:
    """
    Σ |M_δ(t, ξ) ψ(ξ)|² h³ over the grid ball.

    Raises:
        ValueError: If t lies outside [0, T].
    """
    grid = field.grid
    mask = grid.ball_mask
    weighted = w.radial(grid.radii[mask], t) * numpy.abs(field.values[mask])
    return float(numpy.sum(weighted ** 2) * grid.spacing ** 3)


def weight_commutator_bound(w: WeightSpec, t: float, quad: SphereQuadrature, grid: SpectralGrid) -> float:
    """
    max |M(ξ) − M(ξ⁺)| / (sin²(θ/2) M(ξ⁺)) over quadrature angles and grid radii.

    M is radial and |ξ⁺| = |ξ| cos(θ/2), so only the polar angle matters.
    """
    theta = numpy.concatenate([quad.regularized_rule[0], quad.direct_rule[0]])
    radii = numpy.unique(grid.radii[grid.ball_mask & (grid.radii > 0.0)])
    outer = w.radial(radii, t)[:, None]
    inner = w.radial(radii[:, None] * numpy.cos(0.5 * theta)[None, :], t)
    ratio = numpy.abs(outer - inner) / (numpy.sin(0.5 * theta)[None, :] ** 2 * inner)
    return float(ratio.max())


@dataclass(frozen=True)
class EnergyBudget:
    """Realized cancellation term J₂ against |cancellation constant|·W."""

    t: float
    weighted_norm: float
    j2: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.j2 / self.bound if self.bound > 0.0 else (0.0 if self.j2 <= 0.0 else math.inf)

    def holds(self, slack: float = 0.1) -> bool:
        return self.j2 <= self.bound * (1.0 + slack)


def weighted_energy_budget(
    field: CharField,
    t: float,
    w: WeightSpec,
    kernel: AngularKernel,
    quad: SphereQuadrature | None = None,
    *,
    logger: Logger | None = None,
    workers: int | None = None,
) -> EnergyBudget:
    """
    J₂ = Σ_ξ ∫ b (G(ξ⁺) − G(ξ)) dσ h³ with G = |M_δ ψ|².

    The change of variables ξ → ξ⁺ turns J₂ into |cancellation constant|·W on
    the whole space; the grid ball loses the part with |ξ| > R_max.
    """
    grid = field.grid
    mask = grid.ball_mask & (grid.radii > 0.0)
    operator = CollisionOperator(logger, kernel, quad, regularized=not kernel.is_cutoff, workers=workers)

    def change(plus: numpy.ndarray, minus: numpy.ndarray, active: numpy.ndarray) -> numpy.ndarray:
        at_plus = (w(plus, t) * numpy.abs(field.sample(plus))) ** 2
        at_node = (w(active, t) * numpy.abs(field.sample(active))) ** 2
        return at_plus - at_node[:, None, None]

    j2 = float(numpy.sum(operator.sphere_integral(grid.nodes[mask], change)) * grid.spacing ** 3)
    norm = weighted_norm(field, t, w)
    return EnergyBudget(t=t, weighted_norm=norm, j2=j2, bound=abs(cancellation_constant(kernel)) * norm)


@dataclass(frozen=True)
class GronwallFit:
    """
    Rates C with W(t) ≤ W(0)e^{Ct}.

    ``rate`` is fitted against the initial value, ``step_rate`` is the largest
    finite-difference slope of log W between consecutive records.
    """

    rate: float
    step_rate: float

    def bound(self, t: float, initial: float) -> float:
        return initial * math.exp(self.rate * t)


def gronwall_rate(series: Sequence[tuple[float, float]]) -> GronwallFit:
    """
    Fit the Grönwall rate of a positive (t, W) series.

    Raises:
        ValueError: If fewer than two records are given or a value is not positive.
    """
    records = sorted(series)
    if len(records) < 2:
        raise ValueError("gronwall_rate needs at least two (t, value) records")
    if any(value <= 0.0 for _, value in records):
        raise ValueError("gronwall_rate needs positive values")
    t0, w0 = records[0]
    rate = max([0.0, *(math.log(value / w0) / (t - t0) for t, value in records[1:] if t > t0)])
    steps = zip(records, records[1:], strict=False)
    step_rate = max(
        (math.log(b[1] / a[1]) / (b[0] - a[0]) for a, b in steps if b[0] > a[0]),
        default=0.0,
    )
    return GronwallFit(rate=rate, step_rate=step_rate)


def fibonacci_sphere(count: int = SPHERE_SAMPLES) -> numpy.ndarray:
    """Quasi-uniform unit vectors (count, 3)."""
    index = numpy.arange(count) + 0.5
    z = 1.0 - 2.0 * index / count
    azimuth = math.pi * (3.0 - math.sqrt(5.0)) * index
    ring = numpy.sqrt(1.0 - z ** 2)
    return numpy.stack([ring * numpy.cos(azimuth), ring * numpy.sin(azimuth), z], axis=-1)


@dataclass(frozen=True)
class DecayFit:
    """Slope of log sup_{|ξ|=r}|ψ| against log r; ``slope`` is None below the floor."""

    radii: tuple[float, ...]
    sup_values: tuple[float, ...]
    slope: float | None

    @property
    def below_floor(self) -> bool:
        return self.slope is None


def decay_exponent(field: CharField, radii: Sequence[float], samples: int = SPHERE_SAMPLES) -> DecayFit:
    """
    Fit the polynomial decay rate of ψ from its supremum on spheres.

    Raises:
        ValueError: If fewer than 3 radii are given or a radius lies outside (0, R_max].
    """
    if len(radii) < 3:
        raise ValueError(f"decay_exponent needs at least 3 radii, got {len(radii)}")
    if any(not 0.0 < r <= field.grid.R_max for r in radii):
        raise ValueError(f"Radii must lie in (0, R_max = {field.grid.R_max}], got {list(radii)}")
    directions = fibonacci_sphere(samples)
    sups = [float(numpy.abs(field.sample(r * directions)).max()) for r in radii]
    usable = [(r, value) for r, value in zip(radii, sups, strict=True) if value >= DECAY_FLOOR]
    if len(usable) < 2:
        return DecayFit(tuple(float(r) for r in radii), tuple(sups), None)
    log_r, log_sup = numpy.log([r for r, _ in usable]), numpy.log([value for _, value in usable])
    slope = float(numpy.polyfit(log_r, log_sup, 1)[0])
    return DecayFit(tuple(float(r) for r in radii), tuple(sups), slope)


@dataclass(frozen=True)
class HolderCheck:
    """Sampled excess of |ψ(ξ) − ψ(ξ+η)| over ‖ψ−1‖_α(4|ξ|^{α/2}|η|^{α/2} + |η|^α)."""

    alpha: float
    samples: int
    norm: float
    max_violation: float
    violations: int

    @property
    def holds(self) -> bool:
        return self.violations == 0


def holder_bound_check(
    psi_spec: MeasureSpec,
    alpha: float,
    samples: int = HOLDER_SAMPLES,
    seed: int = 0,
    grid: SpectralGrid | None = None,
) -> HolderCheck:
    """
    Sample random (ξ, η) pairs with log-uniform lengths in [10⁻², 10²].

    ‖ψ − 1‖_α is measured with :func:`kalpha_distance` (grid supremum and the
    ξ → 0 limit), not taken from the moment bound of the membership certificate.

    Raises:
        ValueError: If the measure is not in 𝒦^α.
    """
    certificate = kalpha_membership(psi_spec, alpha)
    if not certificate:
        raise ValueError(f"Hoelder check needs a measure in K^{alpha:g}: {certificate.reason}")
    grid = grid or SpectralGrid(R_max=HOLDER_GRID_R_MAX, N=HOLDER_GRID_N)
    norm = kalpha_distance(psi_spec, 1.0, alpha, grid).value
    rng = numpy.random.default_rng(seed)

    def random_points() -> tuple[numpy.ndarray, numpy.ndarray]:
        directions = rng.standard_normal((samples, 3))
        directions /= numpy.linalg.norm(directions, axis=1, keepdims=True)
        lengths = 10.0 ** rng.uniform(-2.0, 2.0, samples)
        return directions * lengths[:, None], lengths

    xi, xi_length = random_points()
    eta, eta_length = random_points()
    difference = numpy.abs(
        numpy.asarray(psi_spec.characteristic(xi)) - numpy.asarray(psi_spec.characteristic(xi + eta))
    )
    half = 0.5 * alpha
    bound = norm * (4.0 * xi_length ** half * eta_length ** half + eta_length ** alpha)
    excess = difference - bound
    return HolderCheck(
        alpha=alpha,
        samples=samples,
        norm=norm,
        max_violation=float(excess.max()),
        violations=int(numpy.count_nonzero(excess > 1e-12)),
    )
