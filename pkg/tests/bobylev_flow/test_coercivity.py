"""Tests for the coercivity functionals, certificates and probe functions."""

import math

import numpy
import pytest

from bobylev_flow.collision import SphereQuadrature
from bobylev_flow.diagnostics.coercivity import (
    CoercivityFunctionals,
    certify,
    coercivity_functionals,
    collision_gap,
    static_degenerate_coercivity,
)
from bobylev_flow.diagnostics.regions import Band
from bobylev_flow.diagnostics.testfunctions import (
    ProbeFunction,
    annular_bump,
    axis_gaussian,
    default_family,
    isotropic_gaussian,
)
from bobylev_flow.grid import CharField, SpectralGrid
from bobylev_flow.kernel import AngularKernel
from bobylev_flow.measures import LineMeasure

TINY_GRID = SpectralGrid(R_max=4.0, N=9)
E3 = (0.0, 0.0, 1.0)


class TestProbeFunctions:
    """The fixed probe family."""

    def test_isotropic_gaussian(self) -> None:
        """h(ξ) = exp(−|ξ|²/(2w²))."""
        probe = isotropic_gaussian(2.0)
        assert probe(numpy.array([0.0, 0.0, 2.0])) == pytest.approx(math.exp(-0.5))

    def test_axis_and_annular_centres(self) -> None:
        """Axis probes peak at their centre, annular ones on their shell."""
        assert axis_gaussian((0.0, 0.0, 3.0), 2.0, 1.0)(numpy.array([0.0, 0.0, 2.0])) == pytest.approx(1.0)
        assert annular_bump(3.0, 0.5)(numpy.array([3.0, 0.0, 0.0])) == pytest.approx(1.0)

    def test_default_family(self) -> None:
        """Three isotropic, two axis and two annular probes."""
        family = default_family(16.0)
        assert [probe.kind for probe in family] == ["isotropic"] * 3 + ["axis"] * 2 + ["annular"] * 2
        assert family[4].centre == pytest.approx((0.0, 8.0, 0.0))

    def test_invalid_probe(self) -> None:
        """Unknown kinds and non-positive widths are rejected."""
        with pytest.raises(ValueError, match="Unknown probe kind"):
            ProbeFunction(name="x", kind="cubic", width=1.0)
        with pytest.raises(ValueError, match="width must be positive"):
            ProbeFunction(name="x", kind="isotropic", width=0.0)


class TestCoercivityFunctionals:
    """Both sides of the time-degenerate estimate."""

    def test_stationary_field_has_no_collision_gap(self, kernel: AngularKernel, small_quad: SphereQuadrature) -> None:
        """ψ ≡ 1 gives G ≡ 0."""
        gap = collision_gap(CharField.constant(TINY_GRID), kernel, small_quad, workers=1)
        assert numpy.all(gap == 0.0)

    def test_constant_at_time_zero_and_later(self, kernel: AngularKernel, small_quad: SphereQuadrature) -> None:
        """With G ≡ 0 the constant is 0 at t = 0 and infinite afterwards."""
        field = CharField.constant(TINY_GRID)
        probe = isotropic_gaussian(2.0)
        initial = coercivity_functionals(field, 0.0, probe, kernel, small_quad, workers=1)
        later = coercivity_functionals(field, 0.5, probe, kernel, small_quad, workers=1)
        assert initial.lhs == 0.0
        assert initial.constant == 0.0
        assert later.rhs_main == 0.0
        assert math.isinf(later.constant)

    @pytest.mark.parametrize("t", [-0.1, 1.5])
    def test_time_outside_run_raises(self, kernel: AngularKernel, t: float) -> None:
        """t must lie in [0, t_max]."""
        with pytest.raises(ValueError, match="outside the run interval"):
            coercivity_functionals(CharField.constant(TINY_GRID), t, isotropic_gaussian(2.0), kernel, t_max=1.0)

    def test_collision_gap_is_positive_for_line_data(self, kernel: AngularKernel,
                                                     small_quad: SphereQuadrature) -> None:
        """cos ξ₃ has |ψ(ξ⁻)| < 1 on a set of positive measure of σ for every ξ ≠ 0."""
        measure = LineMeasure.from_atoms(E3, [(0.5, 1.0), (0.5, -1.0)])
        gap = collision_gap(CharField.from_measure(measure, TINY_GRID), kernel, small_quad, workers=1)
        interior = TINY_GRID.ball_mask & (TINY_GRID.radii > 0.0)
        assert numpy.all(gap[interior] > 0.0)
        assert gap[TINY_GRID.origin_index] == 0.0


class TestCertify:
    """Fitting a single constant over records."""

    RECORDS = [
        CoercivityFunctionals(t=0.1, lhs=1.0, rhs_main=1.0, rhs_l2=1.0),
        CoercivityFunctionals(t=0.2, lhs=3.0, rhs_main=1.0, rhs_l2=1.0),
    ]

    def test_fitted_constant_covers_all_records(self) -> None:
        """The fitted C is the largest ratio and holds up to the last time."""
        certificate = certify(self.RECORDS)
        assert certificate.constant == pytest.approx(1.5)
        assert certificate.horizon == 0.2
        assert certificate.holds

    def test_given_constant_limits_the_horizon(self) -> None:
        """A smaller C only holds up to the first violating time."""
        certificate = certify(self.RECORDS, constant=1.0)
        assert certificate.horizon == 0.1

    def test_infinite_record_fails(self) -> None:
        """A record with a vanishing main term cannot be certified."""
        records = [CoercivityFunctionals(t=0.1, lhs=1.0, rhs_main=0.0, rhs_l2=1.0)]
        assert not certify(records).holds


class TestStaticCoercivity:
    """The anisotropic estimate for line data at t = 0."""

    def test_single_dirac_has_no_gap(self, kernel: AngularKernel, small_grid: SpectralGrid) -> None:
        """A single atom is excluded."""
        measure = LineMeasure.from_atoms(E3, [(1.0, 1.0)])
        with pytest.raises(ValueError, match="single Dirac"):
            static_degenerate_coercivity(measure, isotropic_gaussian(2.0), Band(a1=1.0, a2=2.0), 1.0,
                                         small_grid, kernel)

    def test_two_diracs(self, kernel: AngularKernel, small_grid: SpectralGrid, small_quad: SphereQuadrature) -> None:
        """Positive constant, κ = 1 − cos 1 on the band, and a weight below the isotropic one."""
        measure = LineMeasure.from_atoms(E3, [(0.5, 1.0), (0.5, -1.0)])
        result = static_degenerate_coercivity(
            measure, isotropic_gaussian(2.0), Band(a1=1.0, a2=2.0), 1.0, small_grid, kernel, small_quad, workers=1
        )
        assert result.constant > 0.0
        assert result.kappa == pytest.approx(1.0 - math.cos(1.0), abs=1e-12)
        assert 0.0 < result.anisotropy_ratio < 1.0

    def test_band_only_sets_kappa(self, kernel: AngularKernel, small_grid: SpectralGrid,
                                  small_quad: SphereQuadrature) -> None:
        """Changing the band moves κ but leaves both sides of the estimate alone."""
        measure = LineMeasure.from_atoms(E3, [(0.5, 1.0), (0.5, -1.0)])
        wide, narrow = (
            static_degenerate_coercivity(
                measure, isotropic_gaussian(2.0), band, 1.0, small_grid, kernel, small_quad, workers=1
            )
            for band in (Band(a1=1.0, a2=2.0), Band(a1=1.5, a2=2.0))
        )
        assert narrow.lhs == wide.lhs
        assert narrow.rhs == wide.rhs
        assert narrow.kappa == pytest.approx(1.0 - abs(math.cos(2.0)), abs=1e-12)
        assert narrow.kappa > wide.kappa
