"""Tests for initial measures, their characteristic functions and 𝒦^α distances."""

import math

import numpy
import pytest

from bobylev_flow.grid import SpectralGrid
from bobylev_flow.measures import (
    DiracSum,
    GaussianMixture,
    LineMeasure,
    TabulatedDensity,
    available_variants,
    characteristic,
    kalpha_distance,
    kalpha_membership,
    measure_from_data,
)

E1 = (1.0, 0.0, 0.0)
E3 = (0.0, 0.0, 1.0)


def two_diracs() -> LineMeasure:
    return LineMeasure.from_atoms(E3, [(0.5, 1.0), (0.5, -1.0)])


def sampled_standard_gaussian(nodes: int, extent: float) -> numpy.ndarray:
    axis = numpy.linspace(-extent, extent, nodes)
    v = numpy.stack(numpy.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    return numpy.exp(-0.5 * numpy.sum(v ** 2, axis=-1)) / (2.0 * math.pi) ** 1.5


class TestCharacteristic:
    """Closed-form characteristic functions of every variant."""

    def test_two_diracs_give_cosine(self) -> None:
        """Masses 1/2 at ±e3 have ψ(ξ) = cos ξ₃."""
        points = numpy.array([[0.3, 0.2, 0.7], [1.0, -2.0, 2.5], [0.0, 0.0, 0.0]])
        values = characteristic(two_diracs(), points)
        numpy.testing.assert_allclose(values.real, numpy.cos(points[:, 2]), atol=1e-15)
        numpy.testing.assert_allclose(values.imag, 0.0, atol=1e-15)

    def test_single_point_returns_scalar(self) -> None:
        """A single point of shape (3,) gives a complex scalar."""
        value = DiracSum.from_atoms([(1.0, (0.0, 0.0, 2.0))]).characteristic([0.0, 0.0, 0.25])
        assert isinstance(value, complex)
        assert value == pytest.approx(complex(math.cos(0.5), -math.sin(0.5)), abs=1e-15)

    def test_standard_gaussian(self) -> None:
        """N(0, I) has ψ(ξ) = e^(−|ξ|²/2)."""
        points = numpy.random.default_rng(1).normal(size=(50, 3))
        values = GaussianMixture.standard().characteristic(points)
        numpy.testing.assert_allclose(values, numpy.exp(-0.5 * numpy.sum(points ** 2, axis=1)), atol=1e-15)

    def test_minus_one_has_no_cancellation(self) -> None:
        """ψ − 1 at tiny |ξ| keeps full relative accuracy."""
        value = two_diracs().characteristic_minus_one(numpy.array([0.0, 0.0, 1e-8]))
        assert value.real == pytest.approx(-0.5e-16, rel=1e-10)
        gaussian = GaussianMixture.standard().characteristic_minus_one(numpy.array([1e-8, 0.0, 0.0]))
        assert gaussian.real == pytest.approx(-0.5e-16, rel=1e-10)

    def test_tabulated_gaussian_matches_closed_form(self) -> None:
        """The transform of a sampled standard Gaussian reproduces e^(−|ξ|²/2)."""
        density = TabulatedDensity(values=sampled_standard_gaussian(33, 8.0), extent=8.0, pad_factor=4)
        points = numpy.array([[0.5, 0.3, -0.2], [1.0, 0.0, 0.0], [0.0, -1.5, 0.7]])
        expected = numpy.exp(-0.5 * numpy.sum(points ** 2, axis=1))
        numpy.testing.assert_allclose(density.characteristic(points), expected, atol=1e-4)

    def test_tabulated_outside_lattice_is_zero(self) -> None:
        """Frequencies beyond the transform lattice evaluate to 0."""
        density = TabulatedDensity(values=sampled_standard_gaussian(17, 6.0), extent=6.0)
        far = numpy.array([[density.lattice_extent * 2.0, 0.0, 0.0]])
        assert density.characteristic(far)[0] == 0.0

    def test_tabulated_requires_unit_mass(self) -> None:
        """A density far from unit mass is rejected."""
        with pytest.raises(ValueError, match="unit mass"):
            TabulatedDensity(values=2.0 * sampled_standard_gaussian(17, 6.0), extent=6.0)

    @pytest.mark.parametrize("measure", [
        DiracSum.from_atoms([(0.2, (0.0, 0.0, 0.0)), (0.3, (1.0, -0.5, 0.2)), (0.5, (-0.3, 2.0, 1.1))]),
        LineMeasure.from_atoms((0.6, 0.0, 0.8), [(0.25, -1.5), (0.75, 0.5)]),
        GaussianMixture(
            numpy.array([0.4, 0.6]),
            numpy.array([[1.0, 0.0, -1.0], [0.0, 0.5, 0.0]]),
            numpy.stack([numpy.eye(3), numpy.diag([0.5, 2.0, 1.0])]),
        ),
        TabulatedDensity(values=sampled_standard_gaussian(17, 6.0), extent=6.0),
    ], ids=["dirac-sum", "line", "gaussian-mixture", "tabulated"])
    def test_bounded_and_hermitian(self, measure) -> None:
        """|ψ| ≤ 1 and ψ(−ξ) = conj ψ(ξ) on 10⁴ random frequencies."""
        points = 3.0 * numpy.random.default_rng(7).standard_normal((10_000, 3))
        values = numpy.asarray(measure.characteristic(points))
        mirrored = numpy.asarray(measure.characteristic(-points))
        assert numpy.abs(values).max() <= 1.0 + 1e-9
        numpy.testing.assert_allclose(mirrored, numpy.conj(values), rtol=0.0, atol=1e-10)


class TestValidation:
    """Construction errors of the measure variants."""

    def test_weights_must_sum_to_one(self) -> None:
        """Weights summing to anything but 1 are rejected."""
        with pytest.raises(ValueError, match="sum to 1"):
            DiracSum.from_atoms([(0.5, E1), (0.4, E3)])

    def test_negative_weights_are_rejected(self) -> None:
        """Signed measures are not probability measures."""
        with pytest.raises(ValueError, match="nonnegative"):
            DiracSum.from_atoms([(1.5, E1), (-0.5, E3)])

    def test_line_direction_must_be_unit(self) -> None:
        """The line direction is a unit vector."""
        with pytest.raises(ValueError, match="unit vector"):
            LineMeasure.from_atoms((0.0, 0.0, 2.0), [(1.0, 0.0)])

    def test_covariance_must_be_psd(self) -> None:
        """Indefinite covariances are rejected."""
        with pytest.raises(ValueError, match="semidefinite"):
            GaussianMixture(numpy.ones(1), numpy.zeros((1, 3)), -numpy.eye(3)[None])

    def test_unknown_variant_tag(self) -> None:
        """measure_from_data lists the known variants."""
        with pytest.raises(ValueError, match="DiracSum"):
            measure_from_data({"variant": "Nope"})
        assert set(available_variants()) == {"DiracSum", "GaussianMixture", "LineMeasure", "TabulatedDensity"}

    def test_gaussian_from_data_accepts_scalar_covariance(self) -> None:
        """A scalar covariance means a multiple of the identity."""
        measure = measure_from_data(
            {"variant": "GaussianMixture", "components": [{"weight": 1.0, "mean": [0, 0, 0], "covariance": 2.0}]}
        )
        assert measure.energy() == pytest.approx(6.0)


class TestMoments:
    """Means, second moments and expectations."""

    def test_two_dirac_moments(self) -> None:
        """Masses at ±e3: mean 0, energy 1."""
        measure = two_diracs()
        numpy.testing.assert_allclose(measure.mean(), 0.0, atol=1e-15)
        assert measure.energy() == pytest.approx(1.0)
        assert not measure.is_single_dirac()

    def test_gaussian_fourth_moment_is_exact(self) -> None:
        """The Gauss-Hermite rule integrates E|v|⁴ = 15 exactly."""
        value = GaussianMixture.standard().expectation(lambda v: numpy.sum(v ** 2, axis=-1) ** 2)
        assert value == pytest.approx(15.0, rel=1e-10)

    def test_single_dirac_detection(self) -> None:
        """Repeated atoms at one point still form a single Dirac."""
        assert DiracSum.from_atoms([(0.5, E1), (0.5, E1)]).is_single_dirac()
        assert not DiracSum.from_atoms([(0.5, E1), (0.5, E3)]).is_single_dirac()

    def test_line_shift_along_direction_stays_on_line(self) -> None:
        """A shift along the line keeps a LineMeasure; any other shift gives a DiracSum."""
        measure = two_diracs()
        along = measure.shifted((0.0, 0.0, 0.5))
        assert isinstance(along, LineMeasure)
        numpy.testing.assert_allclose(along.mean(), (0.0, 0.0, 0.5))
        across = measure.shifted((0.5, 0.0, 0.0))
        assert isinstance(across, DiracSum)
        numpy.testing.assert_allclose(across.mean(), (0.5, 0.0, 0.0))

    def test_tabulated_density_cannot_shift(self) -> None:
        """Sampled densities refuse translation."""
        density = TabulatedDensity(values=sampled_standard_gaussian(17, 6.0), extent=6.0)
        with pytest.raises(ValueError, match="translated"):
            density.shifted(E1)


class TestKAlpha:
    """𝒦^α distances and membership certificates."""

    def test_two_diracs_against_one_at_alpha_two(self) -> None:
        """sup (1 − cos ξ₃)/|ξ|² = 1/2, attained as ξ → 0."""
        result = kalpha_distance(two_diracs(), 1.0, 2.0, SpectralGrid(R_max=8.0, N=33))
        assert result.value == pytest.approx(0.5, rel=1e-12)
        assert result.grid_value < 0.5
        assert result.tail_bound == pytest.approx(2.0 / 64.0)

    def test_single_dirac_at_alpha_one(self) -> None:
        """sup |e^(−ib·ξ) − 1|/|ξ| = |b|, the ξ → 0 limit."""
        measure = DiracSum.from_atoms([(1.0, (0.0, 0.0, 2.0))])
        result = kalpha_distance(measure, 1.0, 1.0, SpectralGrid(R_max=4.0, N=17))
        assert result.value == pytest.approx(2.0, rel=1e-12)

    def test_distance_is_symmetric(self) -> None:
        """The distance does not depend on the argument order."""
        grid = SpectralGrid(R_max=4.0, N=17)
        a, b = two_diracs(), GaussianMixture.standard()
        assert kalpha_distance(a, b, 1.5, grid).value == pytest.approx(kalpha_distance(b, a, 1.5, grid).value)

    def test_distance_rejects_alpha_above_two(self) -> None:
        """α is limited to (0, 2]."""
        with pytest.raises(ValueError, match=r"\(0, 2\]"):
            kalpha_distance(two_diracs(), 1.0, 2.5, SpectralGrid(R_max=4.0, N=9))

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_triangle_inequality_on_random_triples(self, alpha: float) -> None:
        """d(a, c) ≤ d(a, b) + d(b, c) for random Dirac sums."""
        rng = numpy.random.default_rng(11)
        grid = SpectralGrid(R_max=4.0, N=17)

        def random_measure() -> DiracSum:
            weights = rng.uniform(0.1, 1.0, 3)
            return DiracSum(weights / weights.sum(), rng.uniform(-1.5, 1.5, (3, 3)))

        for _ in range(5):
            a, b, c = random_measure(), random_measure(), random_measure()
            direct = kalpha_distance(a, c, alpha, grid).value
            detour = kalpha_distance(a, b, alpha, grid).value + kalpha_distance(b, c, alpha, grid).value
            assert direct <= detour + 1e-12

    @pytest.mark.parametrize(("alpha", "beta"), [(1.0, 2.0), (0.6, 1.5)])
    @pytest.mark.parametrize("R_max", [0.5, 4.0])
    def test_embedding_between_exponents(self, alpha: float, beta: float, R_max: float) -> None:
        """‖·‖_α ≤ max(1, R^{β−α}) ‖·‖_β on the ball of radius R."""
        grid = SpectralGrid(R_max=R_max, N=17)
        a, b = two_diracs(), GaussianMixture.standard()
        lower = kalpha_distance(a, b, alpha, grid).value
        upper = kalpha_distance(a, b, beta, grid).value
        assert lower <= max(1.0, R_max ** (beta - alpha)) * upper * (1.0 + 1e-9)

    def test_gaussian_is_member_at_alpha_two(self) -> None:
        """N(0, I) is in 𝒦² with second moment 3."""
        certificate = kalpha_membership(GaussianMixture.standard(), 2.0)
        assert certificate.member
        assert certificate.moment == pytest.approx(3.0)
        assert certificate.norm_bound == pytest.approx(3.0 * 2.0 ** -1)

    def test_nonzero_mean_excludes_alpha_above_one(self) -> None:
        """A Dirac away from the origin is in 𝒦¹ but not in 𝒦²."""
        measure = DiracSum.from_atoms([(1.0, E1)])
        assert kalpha_membership(measure, 1.0)
        certificate = kalpha_membership(measure, 2.0)
        assert not certificate
        assert "mean" in certificate.reason

    def test_membership_rejects_alpha_above_two(self) -> None:
        """𝒦^α is trivial above 2."""
        with pytest.raises(ValueError, match="alpha"):
            kalpha_membership(GaussianMixture.standard(), 3.0)
