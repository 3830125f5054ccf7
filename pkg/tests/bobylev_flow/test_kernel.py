"""Tests for angular kernels and the scalar constants derived from them."""

import math

import numpy
import pytest
from scipy import integrate

from bobylev_flow.kernel import (
    AngularKernel,
    available_profiles,
    cancellation_constant,
    get_profile,
    graded_edges,
    lambda_alpha,
    sphere_moment,
    symmetrized_b,
    theta_moment,
    total_cross_section,
)

HALF_PI = 0.5 * math.pi


def dense_theta_integral(kernel: AngularKernel, weight, extra_points=()) -> float:
    """Adaptive reference for 2π ∫ b g sin θ dθ on a bounded kernel."""
    value, _ = integrate.quad(
        lambda theta: float(kernel(numpy.array([theta]))[0]) * weight(theta) * math.sin(theta),
        0.0,
        HALF_PI,
        points=list(extra_points) or None,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
    )
    return 2.0 * math.pi * value


class TestAngularKernel:
    """Kernel evaluation, validation and cutoff handling."""

    def test_power_law_values(self) -> None:
        """The default profile is K θ^(-2-2s)."""
        kernel = AngularKernel(s=0.25, K=2.0)
        assert float(kernel(0.5)) == pytest.approx(2.0 * 0.5 ** -2.5, rel=1e-14)

    def test_damped_profile_matches_high_precision(self) -> None:
        """The damped profile agrees with an arbitrary-precision evaluation."""
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        kernel = AngularKernel(s=0.25, K=1.0, profile_name="damped-power-law")
        theta = mpmath.mpf("0.5")
        expected = theta ** mpmath.mpf("-2.5") / (1 + theta ** 2)
        assert float(kernel(0.5)) == pytest.approx(float(expected), rel=1e-14)

    def test_symmetrized_kernel_is_the_two_term_sum(self) -> None:
        """The symmetrized kernel at θ equals b(θ) + b(π − θ) in high precision."""
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40

        def raw(theta: numpy.ndarray) -> numpy.ndarray:
            return theta ** -2.5 / (1.0 + theta * theta)

        kernel = symmetrized_b(raw, s=0.25, K=1.0)
        theta = mpmath.mpf("0.5")
        other = mpmath.pi - theta
        expected = theta ** mpmath.mpf("-2.5") / (1 + theta ** 2) + other ** mpmath.mpf("-2.5") / (1 + other ** 2)
        assert float(kernel(0.5)) == pytest.approx(float(expected), rel=1e-13)

    def test_symmetrized_kernel_infers_singularity(self) -> None:
        """Without s and K the singularity is read off the small-angle slope."""
        kernel = symmetrized_b(lambda theta: 3.0 * theta ** -2.5)
        assert kernel.s == pytest.approx(0.25, abs=1e-6)
        assert kernel.K == pytest.approx(3.0, rel=1e-6)

    def test_negative_profile_is_rejected(self) -> None:
        """A raw profile taking negative values cannot be symmetrized."""
        with pytest.raises(ValueError, match="nonnegative"):
            symmetrized_b(lambda theta: numpy.cos(theta) * theta ** -2.5, s=0.25, K=1.0)

    @pytest.mark.parametrize("theta", [0.0, -0.1, 2.0])
    def test_angles_outside_range_raise(self, theta: float) -> None:
        """Only θ in (0, π/2] is accepted."""
        with pytest.raises(ValueError, match="pi/2"):
            AngularKernel(s=0.25)(theta)

    @pytest.mark.parametrize("s", [0.0, 1.0, -0.5])
    def test_invalid_exponent_raises(self, s: float) -> None:
        """The singularity exponent must lie in (0, 1)."""
        with pytest.raises(ValueError, match="s must lie"):
            AngularKernel(s=s)

    def test_unknown_profile_raises(self) -> None:
        """Profile lookup names the available profiles."""
        with pytest.raises(ValueError, match="power-law"):
            get_profile("no-such-profile")
        assert "power-law" in available_profiles()

    def test_cutoff_caps_values(self) -> None:
        """A cutoff kernel never exceeds its level and equals b beyond the cutoff angle."""
        kernel = AngularKernel(s=0.25).with_cutoff(10.0)
        theta = numpy.geomspace(1e-6, HALF_PI, 200)
        values = kernel(theta)
        assert values.max() == pytest.approx(10.0)
        assert kernel.cutoff_angle == pytest.approx(0.1 ** 0.4, rel=1e-12)
        beyond = theta > kernel.cutoff_angle
        numpy.testing.assert_allclose(values[beyond], theta[beyond] ** -2.5, rtol=1e-14)

    def test_regime(self) -> None:
        """Mild below s = 1/2, strong from there on."""
        assert AngularKernel(s=0.25).regime == "mild"
        assert AngularKernel(s=0.75).regime == "strong"

    def test_power_law_has_no_asymptotic_deviation(self) -> None:
        """b θ^(2+2s)/K is exactly 1 for the pure power law."""
        assert max(AngularKernel(s=0.4).asymptotic_deviation()) < 1e-12


class TestThetaConstants:
    """λ_α, the cancellation constant and the sphere moments."""

    @pytest.mark.parametrize("kernel", [
        AngularKernel(s=0.25),
        AngularKernel(s=0.75),
        AngularKernel(s=0.25, profile_name="damped-power-law"),
        AngularKernel(s=0.25, cutoff_level=10.0),
    ])
    def test_lambda_two_vanishes(self, kernel: AngularKernel) -> None:
        """λ₂ is zero up to rounding for every kernel."""
        assert abs(lambda_alpha(kernel, 2.0)) < 1e-10

    def test_lambda_alpha_cutoff_matches_dense_quadrature(self) -> None:
        """λ₁ of b₁₀ agrees with an adaptive reference integral."""
        kernel = AngularKernel(s=0.25, K=1.0, cutoff_level=10.0)
        expected = dense_theta_integral(
            kernel,
            lambda theta: math.cos(0.5 * theta) + math.sin(0.5 * theta) - 1.0,
            extra_points=(kernel.cutoff_angle,),
        )
        value = lambda_alpha(kernel, 1.0)
        assert value > 0.0
        assert value == pytest.approx(expected, rel=1e-8)

    def test_lambda_alpha_non_cutoff_is_stable_under_refinement(self) -> None:
        """Halving the panel ratio exponent changes λ₁ by less than 1e-6 relative."""
        kernel = AngularKernel(s=0.25, K=1.0)
        coarse = lambda_alpha(kernel, 1.0)
        fine = lambda_alpha(kernel, 1.0, ratio=math.sqrt(2.0))
        assert coarse > 0.0
        assert fine == pytest.approx(coarse, rel=1e-6)

    def test_lambda_alpha_is_non_increasing_in_alpha(self) -> None:
        """λ_α decreases along α ∈ {0.6, 0.9, 1.2, 1.6, 2} down to λ₂ = 0."""
        kernel = AngularKernel(s=0.25)
        values = [lambda_alpha(kernel, alpha) for alpha in (0.6, 0.9, 1.2, 1.6, 2.0)]
        assert all(later <= earlier + 1e-10 for earlier, later in zip(values, values[1:]))
        assert values[0] > values[-2] > 0.0

    def test_lambda_alpha_grows_with_cutoff_level(self) -> None:
        """b_n is pointwise non-decreasing in n, and so is λ₁(b_n), below the non-cutoff value."""
        kernel = AngularKernel(s=0.25)
        levels = (10.0, 100.0, 1000.0)
        theta = numpy.geomspace(1e-4, HALF_PI, 400)
        cut = [kernel.with_cutoff(level)(theta) for level in levels]
        assert all(numpy.all(low <= high) for low, high in zip(cut, cut[1:]))
        values = [lambda_alpha(kernel.with_cutoff(level), 1.0) for level in levels]
        assert values[0] < values[1] < values[2] <= lambda_alpha(kernel, 1.0) * (1.0 + 1e-8)

    def test_lambda_alpha_requires_alpha_above_two_s(self) -> None:
        """α ≤ 2s is not integrable for a singular kernel."""
        with pytest.raises(ValueError, match="alpha > 2s"):
            lambda_alpha(AngularKernel(s=0.25), 0.4)

    def test_lambda_alpha_rejects_alpha_above_two(self) -> None:
        """α is limited to (0, 2]."""
        with pytest.raises(ValueError, match=r"\(0, 2\]"):
            lambda_alpha(AngularKernel(s=0.25), 2.5)

    def test_cancellation_constant_cutoff_matches_dense_quadrature(self) -> None:
        """The change-of-variables defect of b₅ agrees with an adaptive reference."""
        kernel = AngularKernel(s=0.25, K=1.0, cutoff_level=5.0)
        expected = dense_theta_integral(
            kernel,
            lambda theta: 1.0 - math.cos(0.5 * theta) ** -3,
            extra_points=(kernel.cutoff_angle,),
        )
        value = cancellation_constant(kernel)
        assert value < 0.0
        assert value == pytest.approx(expected, rel=1e-8)

    def test_cancellation_constant_is_finite_for_strong_singularity(self) -> None:
        """The defect behaves like θ² and stays integrable for any s < 1."""
        value = cancellation_constant(AngularKernel(s=0.9))
        assert math.isfinite(value) and value < 0.0

    def test_sphere_moment_matches_weighted_quadrature(self) -> None:
        """2π ∫ sin(θ/2) b sin θ for s = 1/4 against an algebraic-weight reference."""

        def smooth(theta: float) -> float:
            if theta == 0.0:
                return 0.5
            return math.sin(0.5 * theta) * math.sin(theta) / theta ** 2

        reference, _ = integrate.quad(smooth, 0.0, HALF_PI, weight="alg", wvar=(-0.5, 0.0), epsabs=0.0, epsrel=1e-12)
        assert sphere_moment(AngularKernel(s=0.25), 1.0) == pytest.approx(2.0 * math.pi * reference, rel=1e-8)

    def test_total_cross_section_requires_cutoff(self) -> None:
        """b is not integrable on the sphere without a cutoff."""
        with pytest.raises(ValueError, match="cutoff"):
            total_cross_section(AngularKernel(s=0.25))

    def test_total_cross_section_matches_dense_quadrature(self) -> None:
        """2π ∫ b_n sin θ against an adaptive reference."""
        kernel = AngularKernel(s=0.25, cutoff_level=10.0)
        expected = dense_theta_integral(kernel, lambda theta: 1.0, extra_points=(kernel.cutoff_angle,))
        assert total_cross_section(kernel) == pytest.approx(expected, rel=1e-8)

    def test_theta_moment_diverges_for_strong_singularity(self) -> None:
        """∫ θ b sin θ is infinite when s ≥ 1/2 and no cutoff is set."""
        assert math.isfinite(theta_moment(AngularKernel(s=0.25)))
        with pytest.raises(ValueError, match="diverges"):
            theta_moment(AngularKernel(s=0.75))
        assert math.isfinite(theta_moment(AngularKernel(s=0.75, cutoff_level=100.0)))


class TestGradedEdges:
    """Geometric panel edges for the θ integrals."""

    def test_edges_cover_interval_with_breakpoints(self) -> None:
        """Edges start and end at the interval ends and include the breakpoint."""
        edges = graded_edges(1e-6, HALF_PI, 2.0, breakpoints=(0.3,))
        assert edges[0] == 1e-6
        assert edges[-1] == HALF_PI
        assert 0.3 in edges
        assert numpy.all(numpy.diff(edges) > 0.0)

    def test_invalid_ratio_raises(self) -> None:
        """Ratios of 1 or less do not grade."""
        with pytest.raises(ValueError, match="ratio"):
            graded_edges(1e-6, 1.0, 1.0)
