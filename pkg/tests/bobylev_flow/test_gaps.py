"""Tests for frequency regions and pointwise gaps."""

import math

import numpy
import pytest

from bobylev_flow.collision import SphereQuadrature
from bobylev_flow.diagnostics.gaps import (
    gap_growth_rate,
    gap_time_derivative,
    kappa0_estimate,
    kappa_estimate,
    pointwise_gap,
)
from bobylev_flow.diagnostics.regions import AnnulusDisk, Band, Cone, PolarCap, region_from_data
from bobylev_flow.evolution import Trajectory
from bobylev_flow.grid import CharField, SpectralGrid
from bobylev_flow.kernel import AngularKernel
from bobylev_flow.presets import build_measure


def cosine_field(grid: SpectralGrid) -> CharField:
    return CharField.from_measure(build_measure("two-dirac-line"), grid)


class TestRegions:
    """Membership predicates and their JSON form."""

    def test_annulus_for_atoms(self) -> None:
        """Atoms at e1 and e2 give the e3 axis and d = π/2."""
        region = AnnulusDisk.for_atoms((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
        assert region.axis == (0.0, 0.0, 1.0)
        assert region.d == pytest.approx(0.5 * math.pi)
        assert region.mu == pytest.approx(0.125 * math.pi)

    def test_annulus_needs_independent_atoms(self) -> None:
        """Collinear atoms span no plane."""
        with pytest.raises(ValueError, match="linearly independent"):
            AnnulusDisk.for_atoms((1.0, 0.0, 0.0), (2.0, 0.0, 0.0))

    def test_membership(self) -> None:
        """Each variant accepts and rejects the expected points."""
        points = numpy.array([[0.0, 0.0, 1.5], [1.5, 0.0, 0.0], [0.0, 0.0, 5.0]])
        numpy.testing.assert_array_equal(Band(a1=1.0, a2=2.0).contains(points), [True, False, False])
        numpy.testing.assert_array_equal(
            Cone(omega=(0.0, 0.0, 1.0), epsilon=0.1, R=2.0).contains(points), [False, False, True]
        )
        numpy.testing.assert_array_equal(PolarCap(R0=1.0, epsilon=0.1).contains(points), [True, False, True])
        numpy.testing.assert_array_equal(
            AnnulusDisk(d=1.5, mu=0.25, epsilon=0.1).contains(points), [False, True, False]
        )

    def test_origin_is_never_in_annulus(self) -> None:
        """The annulus excludes ξ = 0 even with a wide shell."""
        assert not AnnulusDisk(d=1.0, mu=2.0, epsilon=1.0).contains(numpy.zeros((1, 3)))[0]

    def test_region_from_data(self) -> None:
        """Axes are normalized and the tag is kept."""
        region = region_from_data({"variant": "Band", "a1": 1.0, "a2": 2.0, "axis": [0.0, 0.0, 2.0]})
        assert region == Band(a1=1.0, a2=2.0)
        assert region.to_data() == {"variant": "Band", "a1": 1.0, "a2": 2.0, "axis": [0.0, 0.0, 1.0]}

    def test_unknown_region_variant(self) -> None:
        """The error lists the known variants."""
        with pytest.raises(ValueError, match="AnnulusDisk"):
            region_from_data({"variant": "Sphere"})

    def test_band_bounds_are_ordered(self) -> None:
        """a1 must be below a2."""
        with pytest.raises(ValueError, match="0 < a1 < a2"):
            Band(a1=2.0, a2=1.0)


class TestPointwiseGap:
    """1 − |ψ| on regions."""

    def test_cosine_gap_on_band(self, small_grid: SpectralGrid) -> None:
        """min over 1 ≤ |ξ₃| ≤ 2 of 1 − |cos ξ₃| is 1 − cos 1, on the plane ξ₃ = 1."""
        gap = pointwise_gap(cosine_field(small_grid), Band(a1=1.0, a2=2.0))
        assert gap.min_gap == pytest.approx(1.0 - math.cos(1.0), abs=1e-12)
        assert abs(gap.argmin[2]) == pytest.approx(1.0)
        assert gap.nodes > 0

    def test_kappa_on_band(self, small_grid: SpectralGrid) -> None:
        """Band nodes have |ξ| ≥ 1, so κ equals the minimum gap."""
        kappa = kappa_estimate(cosine_field(small_grid), Band(a1=1.0, a2=2.0))
        assert kappa == pytest.approx(1.0 - math.cos(1.0), abs=1e-12)

    def test_empty_region_raises(self, small_grid: SpectralGrid) -> None:
        """A band between grid planes holds no node."""
        with pytest.raises(ValueError, match="contains no node"):
            pointwise_gap(cosine_field(small_grid), Band(a1=1.1, a2=1.2))

    def test_three_atoms_have_positive_kappa0(self, small_grid: SpectralGrid) -> None:
        """Atoms not on a line leave a gap on their annulus."""
        field = CharField.from_measure(build_measure("three-dirac-noncoplanar"), small_grid)
        region = AnnulusDisk.for_atoms((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
        assert kappa0_estimate(field, region) > 0.0

    def test_gap_grows_on_equatorial_annulus(self, small_grid: SpectralGrid, small_quad: SphereQuadrature,
                                             kernel: AngularKernel) -> None:
        """At t = 0 cos ξ₃ has no gap on ξ₃ = 0, but Q < 0 there so the gap opens."""
        region = AnnulusDisk(d=3.0, mu=1.0, epsilon=0.01)
        derivative = gap_time_derivative(cosine_field(small_grid), region, kernel, small_quad, workers=1)
        assert derivative.nodes > 0
        assert derivative.positive

    def test_constant_field_has_no_gap_growth(self, kernel: AngularKernel, small_quad: SphereQuadrature) -> None:
        """ψ ≡ 1 is stationary, so the gap rate is zero."""
        grid = SpectralGrid(R_max=4.0, N=9)
        derivative = gap_time_derivative(CharField.constant(grid), Band(a1=1.0, a2=2.0), kernel, small_quad)
        assert derivative.c1 == 0.0
        assert not derivative.positive


class TestGapGrowth:
    """Linear fits of the minimum gap in time."""

    @staticmethod
    def shrinking(grid: SpectralGrid) -> Trajectory:
        """|ψ| = 1 − 0.1 t away from the origin."""
        trajectory = Trajectory()
        for t in (0.0, 0.1, 0.2, 0.3):
            values = numpy.full((grid.N,) * 3, 1.0 - 0.1 * t, dtype=complex)
            values[grid.origin_index] = 1.0
            trajectory.append(CharField(grid=grid, values=values, time=t))
        return trajectory

    def test_slope_of_linear_gap(self) -> None:
        """A gap of 0.1 t is fitted with slope 0.1."""
        grid = SpectralGrid(R_max=4.0, N=9)
        growth = gap_growth_rate(self.shrinking(grid), Band(a1=1.0, a2=2.0), [0.1, 0.2, 0.3])
        assert growth.slope == pytest.approx(0.1, rel=1e-9)
        assert growth.growing

    def test_needs_three_times(self) -> None:
        """Two times cannot give a meaningful fit."""
        grid = SpectralGrid(R_max=4.0, N=9)
        with pytest.raises(ValueError, match="at least 3 distinct times"):
            gap_growth_rate(self.shrinking(grid), Band(a1=1.0, a2=2.0), [0.1, 0.2])

    def test_unresolved_times_raise(self) -> None:
        """Times mapping onto the same snapshot are reported."""
        grid = SpectralGrid(R_max=4.0, N=9)
        with pytest.raises(ValueError, match="resolves only"):
            gap_growth_rate(self.shrinking(grid), Band(a1=1.0, a2=2.0), [0.28, 0.29, 0.3])
