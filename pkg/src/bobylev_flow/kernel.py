"""
Angular cross sections b(cos θ) and the scalar constants derived from them.

A kernel is described by its singularity exponent ``s`` and amplitude ``K``
(b(cos θ)·θ^{2+2s} → K as θ → 0⁺), an optional cutoff level ``n`` turning it
into the bounded kernel min{b, n}, and a profile rule giving b away from
θ = 0. Profiles are registered by name with the :func:`profile` decorator.

All θ-integrals run over (0, π/2] on geometrically graded Gauss-Legendre
panels. Below ``theta_min`` each integrand is replaced by its known power-law
expansion and integrated in closed form.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any

import numpy
from numpy.polynomial.legendre import leggauss
from scipy import optimize

from bobylev_flow.constants import (
    DEFAULT_K,
    DEFAULT_PROFILE,
    HALF_PI,
    THETA_MIN,
    THETA_PANEL_ORDER,
    THETA_PANEL_RATIO,
    TWO_PI,
)

ProfileRule = Callable[[numpy.ndarray], numpy.ndarray]
ProfileFactory = Callable[[float, float], ProfileRule]

_profiles: dict[str, ProfileFactory] = {}


def profile(name: str) -> Callable[[ProfileFactory], ProfileFactory]:
    """Register a kernel profile factory ``(s, K) -> rule`` under ``name``."""

    def decorator(factory: ProfileFactory) -> ProfileFactory:
        _profiles[name] = factory
        return factory

    return decorator


def get_profile(name: str) -> ProfileFactory:
    """Return the registered profile factory for ``name``."""
    try:
        return _profiles[name]
    except KeyError:
        raise ValueError(
            f"Unknown kernel profile {name!r}; available: {', '.join(available_profiles())}"
        ) from None


def available_profiles() -> list[str]:
    """Names of all registered kernel profiles."""
    return sorted(_profiles)


@profile("power-law")
def _power_law(s: float, K: float) -> ProfileRule:
    exponent = -2.0 - 2.0 * s
    return lambda theta: K * theta ** exponent


@profile("damped-power-law")
def _damped_power_law(s: float, K: float) -> ProfileRule:
    exponent = -2.0 - 2.0 * s
    return lambda theta: K * theta ** exponent / (1.0 + theta * theta)


@profile("symmetrized-power-law")
def _symmetrized_power_law(s: float, K: float) -> ProfileRule:
    exponent = -2.0 - 2.0 * s
    return lambda theta: K * theta ** exponent + K * (math.pi - theta) ** exponent


@dataclass(frozen=True)
class AngularKernel:
    """
    Angular cross section on (0, π/2].

    Attributes:
        s: Singularity exponent, 0 < s < 1.
        K: Singularity amplitude, K > 0.
        cutoff_level: Optional bound n; evaluations become min{b, n}.
        profile_name: Registered profile name, or ``"custom"``/``"symmetrized"``
            when ``rule`` is given directly.
        rule: Vectorized map θ -> b(cos θ) without cutoff.
    """

    s: float
    K: float = DEFAULT_K
    cutoff_level: float | None = None
    profile_name: str = DEFAULT_PROFILE
    rule: ProfileRule | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"Kernel exponent s must lie in (0, 1), got {self.s}")
        if not self.K > 0.0:
            raise ValueError(f"Kernel amplitude K must be positive, got {self.K}")
        if self.cutoff_level is not None and not self.cutoff_level > 0.0:
            raise ValueError(f"Cutoff level must be positive, got {self.cutoff_level}")
        if self.rule is None:
            object.__setattr__(self, "rule", get_profile(self.profile_name)(self.s, self.K))

    @property
    def is_cutoff(self) -> bool:
        return self.cutoff_level is not None

    @property
    def regime(self) -> str:
        """"mild" when θ·b is integrable (s < 1/2), "strong" otherwise."""
        return "mild" if self.s < 0.5 else "strong"

    def with_cutoff(self, level: float | None) -> "AngularKernel":
        """Same profile with cutoff level ``level`` (None removes the cutoff)."""
        return replace(self, cutoff_level=level)

    def raw(self, theta: numpy.ndarray | float) -> numpy.ndarray:
        """Profile values without cutoff."""
        assert self.rule is not None
        return numpy.asarray(self.rule(numpy.asarray(theta, dtype=float)), dtype=float)

    def __call__(self, theta: numpy.ndarray | float) -> numpy.ndarray:
        """
        Evaluate b(cos θ) (or min{b, n} with a cutoff).

        Raises:
            ValueError: If any θ lies outside (0, π/2].
        """
        theta = numpy.asarray(theta, dtype=float)
        if numpy.any(theta <= 0.0) or numpy.any(theta > HALF_PI * (1.0 + 1e-12)):
            raise ValueError("Kernel angles must lie in (0, pi/2]")
        values = self.raw(theta)
        if self.cutoff_level is not None:
            values = numpy.minimum(values, self.cutoff_level)
        return values

    @cached_property
    def cutoff_angle(self) -> float | None:
        """Largest θ with b(cos θ) ≥ n, or None without cutoff."""
        if self.cutoff_level is None:
            return None
        level = self.cutoff_level

        def excess(theta: float) -> float:
            return float(self.raw(numpy.array([theta]))[0]) - level

        if excess(HALF_PI) >= 0.0:
            return HALF_PI
        if excess(THETA_MIN) < 0.0:
            return (self.K / level) ** (1.0 / (2.0 + 2.0 * self.s))
        return float(optimize.brentq(excess, THETA_MIN, HALF_PI, xtol=1e-15, rtol=1e-14, maxiter=500))

    def asymptotic_deviation(self, thetas: Sequence[float] = (1e-2, 1e-3, 1e-4)) -> list[float]:
        """Relative deviations |b θ^{2+2s}/K − 1| of the profile at the given angles."""
        theta = numpy.asarray(thetas, dtype=float)
        scaled = self.raw(theta) * theta ** (2.0 + 2.0 * self.s) / self.K
        return [float(abs(value - 1.0)) for value in scaled]

    def describe(self) -> dict[str, Any]:
        """JSON-ready description for reports and run metadata."""
        data: dict[str, Any] = {
            "s": self.s,
            "K": self.K,
            "cutoff_level": self.cutoff_level,
            "profile": self.profile_name,
            "regime": self.regime,
        }
        if self.profile_name == DEFAULT_PROFILE:
            data["profile_note"] = (
                "default power-law profile K*theta^(-2-2s); only the small-angle "
                "asymptotics of the cross section are prescribed"
            )
        return data


def symmetrized_b(
    raw_profile: Callable[[numpy.ndarray], numpy.ndarray],
    *,
    s: float | None = None,
    K: float | None = None,
    cutoff_level: float | None = None,
) -> AngularKernel:
    """
    Build the symmetrized kernel [b(cos θ) + b(cos(π−θ))]·1_{θ≤π/2}.

    Args:
        raw_profile: Vectorized profile θ -> b(cos θ) on (0, π).
        s, K: Singularity parameters; inferred from the small-θ slope when omitted.
        cutoff_level: Optional cutoff of the resulting kernel.
    Raises:
        ValueError: If the profile is negative somewhere on (0, π), or the
            singularity cannot be inferred.
    """
    half = numpy.geomspace(1e-6, HALF_PI, 2048)
    probe = numpy.concatenate([half, math.pi - half])
    values = numpy.asarray(raw_profile(probe), dtype=float)
    if numpy.any(values < 0.0) or numpy.any(numpy.isnan(values)):
        raise ValueError("Raw kernel profile must be nonnegative on (0, pi)")

    def rule(theta: numpy.ndarray) -> numpy.ndarray:
        theta = numpy.asarray(theta, dtype=float)
        return numpy.asarray(raw_profile(theta), dtype=float) + numpy.asarray(
            raw_profile(math.pi - theta), dtype=float
        )

    if s is None or K is None:
        inferred_s, inferred_K = _infer_singularity(rule)
        s = inferred_s if s is None else s
        K = inferred_K if K is None else K
    return AngularKernel(s=s, K=K, cutoff_level=cutoff_level, profile_name="symmetrized", rule=rule)


def _infer_singularity(rule: ProfileRule) -> tuple[float, float]:
    """Estimate (s, K) from the log-log slope of the profile at θ = 1e-4, 1e-5."""
    near, nearer = 1e-4, 1e-5
    b_near, b_nearer = (float(v) for v in rule(numpy.array([near, nearer])))
    if not (b_near > 0.0 and b_nearer > 0.0):
        raise ValueError("Cannot infer the singularity of a profile vanishing near 0; pass s and K")
    slope = math.log(b_near / b_nearer) / math.log(near / nearer)
    s = -0.5 * slope - 1.0
    if not 0.0 < s < 1.0:
        raise ValueError(f"Inferred singularity exponent {s:.4f} outside (0, 1); pass s and K")
    return s, b_nearer * nearer ** (2.0 + 2.0 * s)


def graded_edges(
    lower: float,
    upper: float,
    ratio: float,
    breakpoints: Sequence[float] = (),
) -> numpy.ndarray:
    """Panel edges lower·ratio^k up to ``upper``, with extra breakpoints inserted."""
    if not 0.0 < lower < upper:
        raise ValueError(f"Invalid grading interval ({lower}, {upper})")
    if ratio <= 1.0:
        raise ValueError(f"Grading ratio must exceed 1, got {ratio}")
    edges = [lower]
    while edges[-1] * ratio < upper:
        edges.append(edges[-1] * ratio)
    # merge a sliver last panel into its neighbour
    if len(edges) > 1 and upper / edges[-1] < 1.0 + 0.1 * (ratio - 1.0):
        edges.pop()
    edges.append(upper)
    for point in breakpoints:
        if lower < point < upper and min(abs(point - edge) for edge in edges) > 1e-14 * point:
            edges.append(point)
    return numpy.array(sorted(edges))


def gauss_panels(edges: numpy.ndarray, order: int) -> tuple[numpy.ndarray, numpy.ndarray]:
    """Gauss-Legendre nodes and weights of ``order`` points on every panel."""
    x, w = leggauss(order)
    left, right = edges[:-1], edges[1:]
    mid = 0.5 * (left + right)
    half = 0.5 * (right - left)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def theta_integral(
    kernel: AngularKernel,
    weight: Callable[[numpy.ndarray], numpy.ndarray],
    tail: Sequence[tuple[float, float]],
    *,
    theta_min: float = THETA_MIN,
    ratio: float = THETA_PANEL_RATIO,
    order: int = THETA_PANEL_ORDER,
) -> float:
    """
    Compute 2π ∫₀^{π/2} b(cos θ) g(θ) sin θ dθ.

    Args:
        kernel: Angular kernel (with or without cutoff).
        weight: Vectorized g(θ).
        tail: Pairs (c, p) with g(θ) ≈ Σ c θ^p as θ → 0, used in closed form below ``theta_min``.
        theta_min: Smallest panel edge.
        ratio: Geometric panel ratio.
        order: Gauss-Legendre points per panel.
    Raises:
        ValueError: If the integral diverges at θ = 0 for a non-cutoff kernel.
    """
    cut = kernel.cutoff_angle
    edges = graded_edges(theta_min, HALF_PI, ratio, breakpoints=() if cut is None else (cut,))
    nodes, weights = gauss_panels(edges, order)
    body = math.fsum(kernel(nodes) * numpy.asarray(weight(nodes), dtype=float) * numpy.sin(nodes) * weights)
    return TWO_PI * (body + _tail_integral(kernel, tail, theta_min))


def _tail_integral(kernel: AngularKernel, tail: Sequence[tuple[float, float]], theta_min: float) -> float:
    """∫₀^{θ_min} b g sin θ dθ with b ≈ min(Kθ^{−2−2s}, n), g ≈ Σ c θ^p and sin θ ≈ θ."""
    two_s = 2.0 * kernel.s
    cut = kernel.cutoff_angle
    level = kernel.cutoff_level
    if cut is not None and level is not None and cut >= theta_min:
        return level * math.fsum(c * theta_min ** (p + 2.0) / (p + 2.0) for c, p in tail)

    total = 0.0
    for c, p in tail:
        q = p - two_s
        if cut is None or level is None:
            if q <= 0.0:
                raise ValueError(
                    f"Integral diverges at theta=0 for a non-cutoff kernel: the integrand behaves like "
                    f"theta^({p:g}-1-2s) and requires {p:g} > 2s = {two_s:g}"
                )
            total += kernel.K * c * theta_min ** q / q
        else:
            if abs(q) < 1e-14:
                total += kernel.K * c * math.log(theta_min / cut)
            else:
                total += kernel.K * c * (theta_min ** q - cut ** q) / q
            total += level * c * cut ** (p + 2.0) / (p + 2.0)
    return total


def _half_angle_sin_sq(theta: numpy.ndarray) -> numpy.ndarray:
    return numpy.sin(0.5 * theta) ** 2


def _check_alpha(kernel: AngularKernel, alpha: float, name: str) -> None:
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"{name} requires alpha in (0, 2], got {alpha}")
    if not kernel.is_cutoff and alpha <= 2.0 * kernel.s:
        raise ValueError(
            f"{name} requires alpha > 2s = {2.0 * kernel.s:g} for a non-cutoff kernel "
            f"(sin^alpha(theta/2) b sin(theta) must be integrable), got alpha = {alpha:g}"
        )


def lambda_alpha(kernel: AngularKernel, alpha: float, **grading: Any) -> float:
    """
    Contraction rate 2π ∫ b {cos^α(θ/2) + sin^α(θ/2) − 1} sin θ dθ.

    The bracket is evaluated as expm1(α/2·log1p(−sin²(θ/2))) + sin^α(θ/2) so
    that it vanishes to rounding at α = 2.
    """
    _check_alpha(kernel, alpha, "lambda_alpha")

    def bracket(theta: numpy.ndarray) -> numpy.ndarray:
        sq = _half_angle_sin_sq(theta)
        return numpy.expm1(0.5 * alpha * numpy.log1p(-sq)) + sq ** (0.5 * alpha)

    return theta_integral(kernel, bracket, ((2.0 ** -alpha, alpha), (-alpha / 8.0, 2.0)), **grading)


def cancellation_constant(kernel: AngularKernel, **grading: Any) -> float:
    """Change-of-variables defect 2π ∫ b sin θ (1 − cos^{−3}(θ/2)) dθ (negative)."""

    def defect(theta: numpy.ndarray) -> numpy.ndarray:
        return -numpy.expm1(-1.5 * numpy.log1p(-_half_angle_sin_sq(theta)))

    return theta_integral(kernel, defect, ((-3.0 / 8.0, 2.0),), **grading)


def sphere_moment(kernel: AngularKernel, alpha: float, **grading: Any) -> float:
    """Integrability constant 2π ∫ sin^α(θ/2) b sin θ dθ."""
    _check_alpha(kernel, alpha, "sphere_moment")
    return theta_integral(
        kernel,
        lambda theta: _half_angle_sin_sq(theta) ** (0.5 * alpha),
        ((2.0 ** -alpha, alpha),),
        **grading,
    )


def total_cross_section(kernel: AngularKernel, **grading: Any) -> float:
    """Loss coefficient 2π ∫ b sin θ dθ; finite only with a cutoff."""
    if not kernel.is_cutoff:
        raise ValueError("total_cross_section requires a cutoff kernel (b is not integrable on the sphere)")
    return theta_integral(kernel, numpy.ones_like, ((1.0, 0.0),), **grading)


def theta_moment(kernel: AngularKernel, **grading: Any) -> float:
    """2π ∫ θ b sin θ dθ; finite iff the singularity is mild or the kernel is cut off."""
    return theta_integral(kernel, lambda theta: theta, ((1.0, 1.0),), **grading)
