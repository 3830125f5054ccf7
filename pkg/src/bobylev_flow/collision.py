"""
Bobylev collision operator in Fourier variables.

For every nonzero node ξ of the grid ball the right-hand side

    Q(ψ)(ξ) = ∫_{𝕊²} b(ξ/|ξ|·σ) (ψ(ξ⁺)ψ(ξ⁻) − ψ(ξ)ψ(0)) dσ,   ξ± = ξ/2 ± |ξ|σ/2

is computed on a product rule in polar angles (θ, φ) about ω = ξ/|ξ|.
Everything is written in terms of the deviation d = ψ − 1 so that ψ ≡ 1 gives
exact zeros. Near θ = 0 the integrand is split into three parts that are
each O(θ^α) for ψ ∈ 𝒦^α; the split is exact under the φ-integral.

Nodes are processed in fixed chunks by a thread pool; the summation order
inside a chunk does not depend on the worker count.
"""

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any

import numpy
from numpy.polynomial.legendre import leggauss

from bobylev_flow.constants import (
    DEFAULT_GRADING_RATIO,
    DEFAULT_N_DIRECT,
    DEFAULT_N_PHI,
    DEFAULT_N_THETA,
    DEFAULT_PANEL_ORDER,
    DEFAULT_THETA_SPLIT,
    DEFAULT_TOL_DRIFT,
    HALF_PI,
    NODE_CHUNK_SIZE,
    SIGMA_UNIT_TOLERANCE,
    SPLIT_BOUND_FACTOR,
    TWO_PI,
)
from bobylev_flow.grid import CharField
from bobylev_flow.kernel import AngularKernel, gauss_panels, graded_edges
from bobylev_flow.measures import kalpha_distance
from common.logger import Logger
from common.utils import resolve_workers


@dataclass(frozen=True)
class SphereQuadrature:
    """
    Product rule on the half sphere θ ∈ (0, π/2], φ ∈ [0, 2π).

    The regularized zone (θ_low, θ_c) has ``n_theta`` geometric panels of
    ratio ``grading_ratio`` with ``panel_order`` Gauss points each, so
    θ_low = θ_c / ratio^n_theta. The direct zone [θ_c, π/2] has ``n_direct``
    Gauss points per sub-interval. φ nodes are k·2π/n_phi with n_phi even, so
    the node set is closed under φ → φ + π and φ → π − φ.
    Theta weights include the sin θ surface factor.
    """

    n_theta: int = DEFAULT_N_THETA
    n_phi: int = DEFAULT_N_PHI
    theta_split: float = DEFAULT_THETA_SPLIT
    grading_ratio: float = DEFAULT_GRADING_RATIO
    panel_order: int = DEFAULT_PANEL_ORDER
    n_direct: int = DEFAULT_N_DIRECT
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.n_theta < 1 or self.panel_order < 1 or self.n_direct < 1:
            raise ValueError("Quadrature node counts must be positive")
        if self.n_phi < 2 or self.n_phi % 2:
            raise ValueError(f"n_phi must be even and at least 2, got {self.n_phi}")
        if not 0.0 < self.theta_split < HALF_PI:
            raise ValueError(f"theta_split must lie in (0, pi/2), got {self.theta_split}")
        if self.grading_ratio <= 1.0:
            raise ValueError(f"grading_ratio must exceed 1, got {self.grading_ratio}")

    @property
    def theta_low(self) -> float:
        return self.theta_split / self.grading_ratio ** self.n_theta

    def with_breakpoint(self, theta: float | None) -> "SphereQuadrature":
        """Same rule with a panel edge at ``theta`` (ignored outside (θ_low, π/2))."""
        if theta is None or not self.theta_low < theta < HALF_PI or theta in self.breakpoints:
            return self
        return replace(self, breakpoints=tuple(sorted((*self.breakpoints, float(theta)))))

    def with_split(self, theta_split: float) -> "SphereQuadrature":
        return replace(self, theta_split=theta_split)

    @cached_property
    def regularized_rule(self) -> tuple[numpy.ndarray, numpy.ndarray]:
        """θ nodes and sin θ-weighted weights on (θ_low, θ_c)."""
        edges = graded_edges(self.theta_low, self.theta_split, self.grading_ratio, self.breakpoints)
        nodes, weights = gauss_panels(edges, self.panel_order)
        return nodes, weights * numpy.sin(nodes)

    @cached_property
    def direct_rule(self) -> tuple[numpy.ndarray, numpy.ndarray]:
        """θ nodes and sin θ-weighted weights on [θ_c, π/2]."""
        inner = [point for point in self.breakpoints if self.theta_split < point < HALF_PI]
        edges = numpy.array([self.theta_split, *inner, HALF_PI])
        x, w = leggauss(self.n_direct)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return nodes, weights * numpy.sin(nodes)

    @cached_property
    def phi_nodes(self) -> numpy.ndarray:
        return TWO_PI * numpy.arange(self.n_phi) / self.n_phi

    @property
    def phi_weight(self) -> float:
        return TWO_PI / self.n_phi

    def sphere_measure(self) -> float:
        """Discrete ∫ dσ over θ ∈ (θ_low, π/2] (b ≡ 1)."""
        total = math.fsum(self.regularized_rule[1]) + math.fsum(self.direct_rule[1])
        return TWO_PI * total

    def describe(self) -> dict[str, Any]:
        return {
            "n_theta": self.n_theta,
            "n_phi": self.n_phi,
            "theta_split": self.theta_split,
            "grading_ratio": self.grading_ratio,
            "panel_order": self.panel_order,
            "n_direct": self.n_direct,
            "theta_low": self.theta_low,
            "breakpoints": list(self.breakpoints),
        }


@dataclass(frozen=True)
class CollisionGeometry:
    """Collision frequencies for ξ and σ (arrays of shape (..., 3))."""

    xi: numpy.ndarray
    sigma: numpy.ndarray
    xi_plus: numpy.ndarray
    xi_minus: numpy.ndarray
    zeta: numpy.ndarray
    xi_plus_tilde: numpy.ndarray
    eta_plus: numpy.ndarray
    theta: numpy.ndarray = field(repr=False)


def xi_pm(xi: Any, sigma: Any) -> CollisionGeometry:
    """
    Compute ξ± = ξ/2 ± |ξ|σ/2 with the projection ζ of ξ⁺ on the ξ axis.

    Raises:
        ValueError: If any σ is not a unit vector within 1e-12.
    """
    xi = numpy.asarray(xi, dtype=float)
    sigma = numpy.asarray(sigma, dtype=float)
    if numpy.any(numpy.abs(numpy.linalg.norm(sigma, axis=-1) - 1.0) > SIGMA_UNIT_TOLERANCE):
        raise ValueError("sigma must be a unit vector")
    xi, sigma = numpy.broadcast_arrays(xi, sigma)
    radius = numpy.linalg.norm(xi, axis=-1, keepdims=True)
    omega = numpy.divide(xi, radius, out=numpy.zeros_like(xi), where=radius > 0.0)
    plus = 0.5 * xi + 0.5 * radius * sigma
    minus = 0.5 * xi - 0.5 * radius * sigma
    zeta = numpy.sum(plus * omega, axis=-1, keepdims=True) * omega
    theta = numpy.arccos(numpy.clip(numpy.sum(omega * sigma, axis=-1), -1.0, 1.0))
    return CollisionGeometry(
        xi=xi,
        sigma=sigma,
        xi_plus=plus,
        xi_minus=minus,
        zeta=zeta,
        xi_plus_tilde=2.0 * zeta - plus,
        eta_plus=plus - zeta,
        theta=theta,
    )


def orthonormal_frame(omega: numpy.ndarray) -> tuple[numpy.ndarray, numpy.ndarray]:
    """
    Unit vectors e₁, e₂ completing ω (shape (M, 3)) to a right-handed frame.

    e₁ is the Gram-Schmidt projection of the coordinate axis along which |ω| is smallest.
    """
    axis = numpy.argmin(numpy.abs(omega), axis=1)
    reference = numpy.eye(3)[axis]
    e1 = reference - numpy.sum(reference * omega, axis=1, keepdims=True) * omega
    e1 /= numpy.linalg.norm(e1, axis=1, keepdims=True)
    return e1, numpy.cross(omega, e1)


@dataclass(frozen=True)
class _Zone:
    nodes: numpy.ndarray
    weights: numpy.ndarray  # b(θ) · w_θ · sin θ
    split: bool


class CollisionOperator:
    """
    Right-hand side evaluator for one kernel and quadrature.

    Args:
        logger: Logger instance.
        kernel: Angular kernel. A cutoff level adds θ_n as a panel edge.
        quad: Sphere quadrature.
        regularized: Use the split integrand below θ_c. Defaults to True for
            non-cutoff kernels; direct evaluation requires a cutoff.
        workers: Thread count, capped by ``BOBK_THREADS``.
    """

    def __init__(
        self,
        logger: Logger | None,
        kernel: AngularKernel,
        quad: SphereQuadrature | None = None,
        *,
        regularized: bool | None = None,
        workers: int | None = None,
    ) -> None:
        self._logger = logger
        self.kernel = kernel
        self.quad = (quad or SphereQuadrature()).with_breakpoint(kernel.cutoff_angle)
        self.regularized = (not kernel.is_cutoff) if regularized is None else regularized
        if not self.regularized and not kernel.is_cutoff:
            raise ValueError(
                "Direct evaluation needs a cutoff kernel (b is not integrable); use rhs_regularized instead"
            )
        self.workers = resolve_workers(workers)
        self._zones = self._build_zones()

    def _build_zones(self) -> tuple[_Zone, ...]:
        low_nodes, low_weights = self.quad.regularized_rule
        high_nodes, high_weights = self.quad.direct_rule
        return (
            _Zone(low_nodes, self.kernel(low_nodes) * low_weights, self.regularized),
            _Zone(high_nodes, self.kernel(high_nodes) * high_weights, False),
        )

    def evaluate(self, field: CharField) -> numpy.ndarray:
        """RHS on every node; 0 at the origin and outside the ball."""
        grid = field.grid
        mask = grid.ball_mask & (grid.radii > 0.0)
        result = numpy.zeros(grid.radii.shape, dtype=complex)
        result[mask] = self.evaluate_points(field, grid.nodes[mask])
        return result

    __call__ = evaluate

    def evaluate_points(self, field: CharField, points: numpy.ndarray) -> numpy.ndarray:
        """RHS at arbitrary points of the ball, shape (M, 3) -> (M,)."""
        if self._logger is not None:
            self._logger.debug(
                f"Collision RHS at {len(points)} nodes, "
                f"{'regularized' if self.regularized else 'direct'}, {self.workers} worker(s)"
            )
        return self._run_chunks(points, lambda chunk: self._evaluate_chunk(field, chunk), complex)

    def sphere_integral(
        self,
        points: numpy.ndarray,
        integrand: Callable[[numpy.ndarray, numpy.ndarray, numpy.ndarray], numpy.ndarray],
        dtype: type = float,
    ) -> numpy.ndarray:
        """
        ∫ b g dσ at each point (0 at the origin).

        ``integrand(xi_plus, xi_minus, points)`` receives arrays of shape
        (M, T, F, 3), (M, T, F, 3) and (M, 3) and returns g of shape (M, T, F).
        """

        def chunk_integral(chunk: numpy.ndarray) -> numpy.ndarray:
            total = numpy.zeros(chunk.shape[0], dtype=dtype)
            nonzero = numpy.linalg.norm(chunk, axis=1) > 0.0
            if not numpy.any(nonzero):
                return total
            active = chunk[nonzero]
            for zone in self._zones:
                zeta, eta, along_minus = self.frequencies(active, zone.nodes)
                values = integrand(zeta[:, :, None, :] + eta, along_minus[:, :, None, :] - eta, active)
                total[nonzero] += (self.quad.phi_weight * values.sum(axis=-1)) @ zone.weights
            return total

        return self._run_chunks(points, chunk_integral, dtype)

    def gap_integral(self, field: CharField, points: numpy.ndarray) -> numpy.ndarray:
        """∫ b (1 − |ψ(ξ⁻)|) dσ at each point."""

        def gap(plus: numpy.ndarray, minus: numpy.ndarray, active: numpy.ndarray) -> numpy.ndarray:
            deviation = field.sample_minus_one(minus)
            # 1 − |1 + d| without cancellation
            return -(2.0 * deviation.real + numpy.abs(deviation) ** 2) / (1.0 + numpy.abs(1.0 + deviation))

        return self.sphere_integral(points, gap)

    def _run_chunks(
        self, points: numpy.ndarray, work: Callable[[numpy.ndarray], numpy.ndarray], dtype: type
    ) -> numpy.ndarray:
        points = numpy.asarray(points, dtype=float).reshape(-1, 3)
        chunks = [points[start:start + NODE_CHUNK_SIZE] for start in range(0, points.shape[0], NODE_CHUNK_SIZE)]
        if not chunks:
            return numpy.zeros(0, dtype=dtype)
        if self.workers == 1 or len(chunks) == 1:
            parts = [work(chunk) for chunk in chunks]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                parts = list(executor.map(work, chunks))
        return numpy.concatenate(parts)

    def frequencies(
        self, points: numpy.ndarray, zone_nodes: numpy.ndarray
    ) -> tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]:
        """
        Polar-form collision frequencies for nonzero points (M, 3) and θ nodes (T,).

        Returns ζ = |ξ|cos²(θ/2)ω with shape (M, T, 3), η⁺ = (|ξ|/2)sin θ·u(φ)
        with shape (M, T, F, 3) and |ξ|sin²(θ/2)ω with shape (M, T, 3), so that
        ξ⁺ = ζ + η⁺, ξ⁻ = |ξ|sin²(θ/2)ω − η⁺ and ξ̃⁺ = ζ − η⁺.
        """
        radius = numpy.linalg.norm(points, axis=1)
        omega = points / radius[:, None]
        e1, e2 = orthonormal_frame(omega)
        phi = self.quad.phi_nodes
        directions = numpy.cos(phi)[None, :, None] * e1[:, None, :] + numpy.sin(phi)[None, :, None] * e2[:, None, :]
        cos_sq = numpy.cos(0.5 * zone_nodes) ** 2
        sin_sq = numpy.sin(0.5 * zone_nodes) ** 2
        half_sin = 0.5 * numpy.sin(zone_nodes)
        zeta = (radius[:, None] * cos_sq[None, :])[:, :, None] * omega[:, None, :]
        eta = (radius[:, None] * half_sin[None, :])[:, :, None, None] * directions[:, None, :, :]
        along_minus = (radius[:, None] * sin_sq[None, :])[:, :, None] * omega[:, None, :]
        return zeta, eta, along_minus

    def zone_terms(
        self, field: CharField, points: numpy.ndarray, zone_nodes: numpy.ndarray, split: bool
    ) -> tuple[numpy.ndarray, ...]:
        """
        φ-resolved integrand pieces at θ = ``zone_nodes`` for nonzero points (M, 3).

        Returns (direct,) with shape (M, T, F) when ``split`` is False, otherwise
        (I₁, I₂, I₃) with I₂ of shape (M, T) and the others (M, T, F).
        """
        zeta, eta, along_minus = self.frequencies(points, zone_nodes)
        d_plus = field.sample_minus_one(zeta[:, :, None, :] + eta)
        d_minus = field.sample_minus_one(along_minus[:, :, None, :] - eta)
        d_node = field.sample_minus_one(points)[:, None]
        if not split:
            return (d_plus + d_minus + d_plus * d_minus - d_node[:, :, None],)
        d_zeta = field.sample_minus_one(zeta)
        d_tilde = field.sample_minus_one(zeta[:, :, None, :] - eta)
        first = 0.5 * (d_plus + d_tilde) - d_zeta[:, :, None]
        second = d_zeta - d_node
        third = (1.0 + d_plus) * d_minus
        return first, second, third

    def _evaluate_chunk(self, field: CharField, points: numpy.ndarray) -> numpy.ndarray:
        total = numpy.zeros(points.shape[0], dtype=complex)
        nonzero = numpy.linalg.norm(points, axis=1) > 0.0
        if not numpy.any(nonzero):
            return total
        active = points[nonzero]
        for zone in self._zones:
            terms = self.zone_terms(field, active, zone.nodes, zone.split)
            if zone.split:
                first, second, third = terms
                phi_sum = self.quad.phi_weight * (first.sum(axis=-1) + third.sum(axis=-1)) + TWO_PI * second
            else:
                phi_sum = self.quad.phi_weight * terms[0].sum(axis=-1)
            total[nonzero] += phi_sum @ zone.weights
        return total

    def describe(self) -> dict[str, Any]:
        return {
            "path": "regularized" if self.regularized else "direct",
            "workers": self.workers,
            "kernel": self.kernel.describe(),
            "quadrature": self.quad.describe(),
        }


def _check_bounded(field: CharField, tol_drift: float) -> None:
    peak = field.max_abs()
    if peak > 1.0 + tol_drift:
        raise ValueError(
            f"Field violates |psi| <= 1 + {tol_drift:g} (max {peak:.12g}); the split integrand bounds do not apply"
        )


def rhs_direct(
    field: CharField,
    kernel: AngularKernel,
    quad: SphereQuadrature | None = None,
    *,
    logger: Logger | None = None,
    workers: int | None = None,
) -> numpy.ndarray:
    """
    RHS with the unsplit integrand ψ(ξ⁺)ψ(ξ⁻) − ψ(ξ) on a cutoff kernel.

    Raises:
        ValueError: If ``kernel`` has no cutoff level.
    """
    if not kernel.is_cutoff:
        raise ValueError("rhs_direct requires a cutoff kernel; use rhs_regularized for the singular kernel")
    return CollisionOperator(logger, kernel, quad, regularized=False, workers=workers).evaluate(field)


def rhs_regularized(
    field: CharField,
    kernel: AngularKernel,
    quad: SphereQuadrature | None = None,
    *,
    logger: Logger | None = None,
    workers: int | None = None,
    tol_drift: float = DEFAULT_TOL_DRIFT,
) -> numpy.ndarray:
    """
    RHS with the split integrand below θ_c and the direct one above.

    Raises:
        ValueError: If |ψ| exceeds 1 + ``tol_drift`` on the ball.
    """
    _check_bounded(field, tol_drift)
    return CollisionOperator(logger, kernel, quad, regularized=True, workers=workers).evaluate(field)


def regularized_tail_bound(field: CharField, kernel: AngularKernel, quad: SphereQuadrature, alpha: float) -> float:
    """
    Bound on the neglected θ < θ_low contribution at any node of the ball.

    Uses |I₁ + I₂ + I₃| ≤ 7‖1−ψ‖_α |ξ|^α sin^α(θ/2) and b ≤ Kθ^{−2−2s} (or b ≤ n).

    Raises:
        ValueError: If alpha ≤ 2s for a non-cutoff kernel.
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"regularized_tail_bound requires alpha in (0, 2], got {alpha}")
    norm = kalpha_distance(field, 1.0, alpha, field.grid).value
    theta_low = quad.theta_low
    scale = TWO_PI * SPLIT_BOUND_FACTOR * norm * field.grid.R_max ** alpha * 2.0 ** -alpha
    if kernel.is_cutoff:
        assert kernel.cutoff_level is not None
        bounded = kernel.cutoff_level * theta_low ** (alpha + 2.0) / (alpha + 2.0)
        singular = kernel.K * theta_low ** (alpha - 2.0 * kernel.s) / (alpha - 2.0 * kernel.s) if alpha > 2.0 * kernel.s else math.inf
        return scale * min(bounded, singular)
    if alpha <= 2.0 * kernel.s:
        raise ValueError(f"regularized_tail_bound requires alpha > 2s = {2.0 * kernel.s:g}, got {alpha}")
    return scale * kernel.K * theta_low ** (alpha - 2.0 * kernel.s) / (alpha - 2.0 * kernel.s)


def cutoff_sequence(
    field: CharField,
    kernel: AngularKernel,
    n_list: Iterable[float],
    quad: SphereQuadrature | None = None,
    *,
    logger: Logger | None = None,
    workers: int | None = None,
) -> dict[float, numpy.ndarray]:
    """rhs_direct with b_n = min{b, n} for each increasing cutoff level."""
    levels = [float(n) for n in n_list]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError(f"Cutoff levels must be strictly increasing, got {levels}")
    return {n: rhs_direct(field, kernel.with_cutoff(n), quad, logger=logger, workers=workers) for n in levels}


def truncation_exponent(s: float) -> float:
    """Convergence order in n of rhs_direct(b_n): the neglected part scales like n^{−(2−2s)/(2+2s)}."""
    return (2.0 - 2.0 * s) / (2.0 + 2.0 * s)


def richardson_limit(values_by_n: Mapping[float, Any], s: float) -> Any:
    """
    Extrapolate a cutoff sequence to n → ∞ from its two largest levels.

    Raises:
        ValueError: With fewer than two levels.
    """
    if len(values_by_n) < 2:
        raise ValueError("richardson_limit needs at least two cutoff levels")
    levels = sorted(values_by_n)
    n1, n2 = levels[-2], levels[-1]
    p = truncation_exponent(s)
    w1, w2 = n1 ** p, n2 ** p
    return (w2 * numpy.asarray(values_by_n[n2]) - w1 * numpy.asarray(values_by_n[n1])) / (w2 - w1)


@dataclass(frozen=True)
class SplitIntegrandBound:
    """Measured constant C in |I₁| ≤ C θ^α at one node and the Hölder-bound reference."""

    node: tuple[float, float, float]
    alpha: float
    constant: float
    reference: float

    @property
    def ratio(self) -> float:
        return self.constant / self.reference if self.reference > 0.0 else math.inf


def split_integrand_bound(
    field: CharField,
    kernel: AngularKernel,
    quad: SphereQuadrature,
    alpha: float,
    node: Sequence[float],
) -> SplitIntegrandBound:
    """
    max over regularized-zone (θ, φ) of |I₁(θ, φ)| / θ^α at ``node``.

    The reference 2^{1−α}‖1−ψ‖_α |ξ|^α is the leading Hölder estimate
    2‖1−ψ‖_α (|ξ| sin(θ/2))^α divided by θ^α.
    """
    point = numpy.asarray(node, dtype=float).reshape(1, 3)
    operator = CollisionOperator(None, kernel, quad, regularized=True, workers=1)
    nodes = operator.quad.regularized_rule[0]
    first, _, _ = operator.zone_terms(field, point, nodes, split=True)
    constant = float((numpy.abs(first[0]).max(axis=-1) / nodes ** alpha).max())
    norm = kalpha_distance(field, 1.0, alpha, field.grid).value
    radius = float(numpy.linalg.norm(point))
    return SplitIntegrandBound(
        node=tuple(float(c) for c in point[0]),
        alpha=alpha,
        constant=constant,
        reference=2.0 ** (1.0 - alpha) * norm * radius ** alpha,
    )


def theta_split_sensitivity(
    field: CharField,
    kernel: AngularKernel,
    quad: SphereQuadrature,
    splits: Sequence[float] = (math.pi / 16, math.pi / 8, math.pi / 4),
    *,
    logger: Logger | None = None,
    workers: int | None = None,
) -> dict[float, float]:
    """Sup-node difference of rhs_regularized between each θ_c in ``splits`` and ``quad.theta_split``."""
    reference = CollisionOperator(logger, kernel, quad, regularized=True, workers=workers).evaluate(field)
    mask = field.grid.ball_mask
    result = {}
    for split in splits:
        values = CollisionOperator(logger, kernel, quad.with_split(split), regularized=True, workers=workers).evaluate(field)
        result[float(split)] = float(numpy.abs(values - reference)[mask].max())
    return result
