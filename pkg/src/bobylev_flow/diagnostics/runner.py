"""
Diagnostics orchestration: evaluates every enabled functional on the
checkpoints of a trajectory and collects them into a report.
"""

import math
from collections.abc import Sequence
from dataclasses import replace
from typing import TYPE_CHECKING, Any

from bobylev_flow.collision import SphereQuadrature
from bobylev_flow.diagnostics.coercivity import certify, collision_gap, functionals_from_gap
from bobylev_flow.diagnostics.entropy import entropy, h_trend
from bobylev_flow.diagnostics.gaps import (
    gap_growth_rate,
    gap_time_derivative,
    kappa0_estimate,
    kappa_estimate,
    pointwise_gap,
)
from bobylev_flow.diagnostics.moments import (
    analytic_moment,
    mean_vector,
    moment_propagation_fit,
    moments_and_energy,
    v_moment,
)
from bobylev_flow.diagnostics.norms import (
    WeightSpec,
    decay_exponent,
    gronwall_rate,
    holder_bound_check,
    weight_commutator_bound,
    weighted_energy_budget,
    weighted_norm,
)
from bobylev_flow.diagnostics.regions import AnnulusDisk, Band, RegionSpec
from bobylev_flow.diagnostics.report import DiagnosticsReport
from bobylev_flow.diagnostics.testfunctions import default_family
from bobylev_flow.evolution import EvolutionConfig, Trajectory, contraction_check, evolve
from bobylev_flow.grid import CharField, SpectralGrid
from bobylev_flow.kernel import AngularKernel, cancellation_constant, lambda_alpha
from bobylev_flow.measures import MeasureSpec, kalpha_membership
from common.logger import Logger

if TYPE_CHECKING:
    from bobylev_flow.classes import DiagnosticsSettings

TIME_MATCH = 1e-9


def _snapshots(trajectory: Trajectory, times: Sequence[float]) -> list[CharField]:
    """Snapshots recorded at exactly the requested times (others are skipped)."""
    found = []
    for t in sorted(set(times)):
        snapshot = trajectory.at(t)
        if abs(snapshot.time - t) <= TIME_MATCH and all(snapshot is not other for other in found):
            found.append(snapshot)
    return found


class DiagnosticsRunner:
    """
    Evaluates the configured diagnostics of one scenario.

    Args:
        logger: Logger instance.
        settings: Diagnostics section of the run configuration.
        kernel: Angular kernel of the run.
        quad: Sphere quadrature of the run.
        workers: Thread count for collision integrals.
    """

    def __init__(
        self,
        logger: Logger,
        settings: "DiagnosticsSettings",
        kernel: AngularKernel,
        quad: SphereQuadrature,
        *,
        workers: int | None = None,
    ) -> None:
        self._logger = logger
        self._settings = settings
        self._kernel = kernel
        self._quad = quad
        self._workers = workers

    def run(
        self,
        trajectory: Trajectory,
        measure: MeasureSpec,
        region: RegionSpec,
        *,
        run_id: str,
        scenario: str,
        axis: Sequence[float] = (0.0, 0.0, 1.0),
        seed: int = 0,
    ) -> DiagnosticsReport:
        report = DiagnosticsReport(run_id=run_id, scenario=scenario)
        settings = self._settings
        t_end = trajectory.final.time
        report.scalars["kernel_regime"] = self._kernel.regime
        report.scalars["region"] = region.to_data()
        self._constants(report, trajectory)

        if settings.coercivity:
            self._coercivity(report, trajectory, measure, axis)
        if settings.gaps:
            self._gaps(report, trajectory, region)
        if settings.norms:
            self._norms(report, trajectory, t_end)
        if settings.moments:
            self._moments(report, trajectory)
        if settings.entropy:
            self._entropy(report, trajectory)
        if settings.holder:
            self._holder(report, measure, seed)

        bad = report.non_finite()
        if bad:
            self._logger.warning(f"Non-finite entries in series: {', '.join(bad)}")
        return report

    def _constants(self, report: DiagnosticsReport, trajectory: Trajectory) -> None:
        alpha = float(trajectory.policy.get("alpha", 2.0))
        report.scalars["alpha"] = alpha
        report.scalars["lambda_alpha"] = lambda_alpha(self._kernel, alpha)
        report.scalars["lambda_2"] = lambda_alpha(self._kernel, 2.0)
        report.scalars["cancellation_constant"] = cancellation_constant(self._kernel)

    def coercivity_constant(
        self, trajectory: Trajectory, measure: MeasureSpec, axis: Sequence[float]
    ) -> tuple[list[tuple[int, Any]], Any]:
        """Coercivity records per (probe index, functionals) and their certificate."""
        grid = trajectory.final.grid
        probes = default_family(grid.R_max, axis)
        records = []
        for snapshot in _snapshots(trajectory, self._settings.coercivity_times):
            gap = collision_gap(snapshot, self._kernel, self._quad, logger=self._logger, workers=self._workers)
            for index, probe in enumerate(probes):
                records.append((index, functionals_from_gap(gap, grid, snapshot.time, probe, self._kernel.s)))
        return records, certify([functionals for _, functionals in records])

    def _coercivity(
        self, report: DiagnosticsReport, trajectory: Trajectory, measure: MeasureSpec, axis: Sequence[float]
    ) -> None:
        if measure.is_single_dirac():
            report.scalars["coercivity"] = "not applicable: a single Dirac mass has no collision gap"
            return
        self._logger.info("Diagnostics: coercivity certificates")
        records, certificate = self.coercivity_constant(trajectory, measure, axis)
        series = report.add_series("coercivity", ["t", "probe", "lhs", "rhs_main", "rhs_l2", "constant"])
        for index, functionals in records:
            series.append(
                functionals.t, index, functionals.lhs, functionals.rhs_main, functionals.rhs_l2,
                functionals.constant if math.isfinite(functionals.constant) else math.nan,
            )
        report.scalars["coercivity_constant"] = certificate.constant
        report.scalars["coercivity_horizon"] = certificate.horizon
        report.scalars["probes"] = [probe.describe() for probe in default_family(trajectory.final.grid.R_max, axis)]

    def _gaps(self, report: DiagnosticsReport, trajectory: Trajectory, region: RegionSpec) -> None:
        self._logger.info(f"Diagnostics: pointwise gaps on {region.variant_name}")
        times = [0.0, *self._settings.gap_times]
        snapshots = _snapshots(trajectory, times)
        series = report.add_series("gap", ["t", "min_gap"])
        for snapshot in snapshots:
            series.append(snapshot.time, pointwise_gap(snapshot, region).min_gap)
        positive = [snapshot.time for snapshot in snapshots if snapshot.time > 0.0]
        if len(positive) >= 3:
            report.scalars["gap_slope"] = gap_growth_rate(trajectory, region, positive).slope
        else:
            self._logger.warning(f"Gap growth needs at least 3 checkpoints in {self._settings.gap_times}")
        if isinstance(region, AnnulusDisk):
            report.scalars["kappa0"] = kappa0_estimate(trajectory.snapshots[0], region)
        if isinstance(region, Band):
            report.scalars["kappa"] = kappa_estimate(trajectory.snapshots[0], region)
        derivative = gap_time_derivative(
            trajectory.snapshots[0], region, self._kernel, self._quad, logger=self._logger, workers=self._workers
        )
        report.scalars["c1"] = derivative.c1

    def _norms(self, report: DiagnosticsReport, trajectory: Trajectory, t_end: float) -> None:
        self._logger.info("Diagnostics: weighted norms and decay exponents")
        settings = self._settings
        weight = WeightSpec(N=settings.weight_N, delta=settings.weight_delta, T=t_end)
        norms = report.add_series("weighted_norm", ["t", "value"])
        for snapshot in trajectory.snapshots:
            norms.append(snapshot.time, weighted_norm(snapshot, snapshot.time, weight))
        positive = [(t, value) for t, value in zip(norms.times, norms.column("value"), strict=True) if value > 0.0]
        if len(positive) >= 2:
            report.scalars["gronwall_rate"] = gronwall_rate(positive).rate
        grid = trajectory.final.grid
        report.scalars["weight_commutator_bound"] = weight_commutator_bound(weight, t_end, self._quad, grid)

        if settings.energy_budget:
            budget = report.add_series("energy_budget", ["t", "j2", "bound"])
            for snapshot in trajectory.snapshots:
                result = weighted_energy_budget(
                    snapshot, snapshot.time, weight, self._kernel, self._quad,
                    logger=self._logger, workers=self._workers,
                )
                budget.append(result.t, result.j2, result.bound)

        radii = [r for r in settings.decay_radii if 0.0 < r <= grid.R_max]
        if len(radii) < 3:
            self._logger.warning(f"Decay exponent skipped: fewer than 3 radii within R_max = {grid.R_max}")
            return
        decay = report.add_series("decay_exponent", ["t", "slope"])
        below_floor = []
        for snapshot in trajectory.snapshots:
            fit = decay_exponent(snapshot, radii)
            if fit.slope is None:
                below_floor.append(snapshot.time)
            else:
                decay.append(snapshot.time, fit.slope)
        if below_floor:
            report.scalars["decay_below_floor"] = below_floor

    def _moments(self, report: DiagnosticsReport, trajectory: Trajectory) -> None:
        self._logger.info("Diagnostics: moments and energy")
        series = report.add_series("moments", ["t", "mean_x", "mean_y", "mean_z", "energy", "v_moment"])
        for snapshot in trajectory.snapshots:
            mean = mean_vector(snapshot)
            series.append(snapshot.time, *mean, moments_and_energy(snapshot, 2), v_moment(snapshot))
        initial = trajectory.snapshots[0]
        exact = analytic_moment(initial, 2)
        if exact is not None:
            report.scalars["energy_exact"] = exact
        energies = series.column("energy")
        if energies[0] > 0.0:
            report.scalars["energy_drift"] = max(abs(e - energies[0]) for e in energies) / energies[0]
            report.scalars["energy_excess"] = max(e for e in energies) / energies[0] - 1.0
        moments = list(zip(series.times, series.column("v_moment"), strict=True))
        report.scalars["moment_propagation_constant"] = moment_propagation_fit(moments).constant

    def _entropy(self, report: DiagnosticsReport, trajectory: Trajectory) -> None:
        self._logger.info("Diagnostics: entropy")
        series = report.add_series("entropy", ["t", "L", "H", "clipped_fraction"])
        results = [entropy(snapshot, logger=self._logger)
                   for snapshot in _snapshots(trajectory, [0.0, *self._settings.entropy_times])]
        for result in results:
            series.append(result.t, result.L, result.H, result.clipped_fraction)
        reliable = [result for result in results if result.reliable]
        report.scalars["entropy_reliable_times"] = [result.t for result in reliable]
        if len(reliable) >= 2:
            report.scalars["h_non_increasing"] = h_trend(reliable)

    def _holder(self, report: DiagnosticsReport, measure: MeasureSpec, seed: int) -> None:
        checks = {}
        for alpha in (1.0, 2.0):
            if not kalpha_membership(measure, alpha):
                continue
            check = holder_bound_check(measure, alpha, self._settings.holder_samples, seed)
            checks[f"{alpha:g}"] = {"max_violation": check.max_violation, "violations": check.violations}
        report.scalars["holder"] = checks

    def contraction(
        self,
        report: DiagnosticsReport,
        measure: MeasureSpec,
        config: EvolutionConfig,
    ) -> None:
        """
        Evolve ``measure`` and its shifted companion with b_n and compare them in 𝒦^α.

        Both runs use the cutoff level ``contraction_cutoff`` of the settings.
        """
        settings = self._settings
        self._logger.info(
            f"Diagnostics: contraction against a companion shifted by {settings.contraction_shift:g} along e3"
        )
        companion = measure.shifted((0.0, 0.0, settings.contraction_shift))
        cutoff_config = replace(config, kernel=config.kernel.with_cutoff(settings.contraction_cutoff), alpha=None)
        first = evolve(measure, cutoff_config, logger=self._logger)
        second = evolve(companion, cutoff_config, logger=self._logger)
        result = contraction_check(first, second, cutoff_config.kernel, settings.contraction_alpha)
        series = report.add_series("contraction", ["t", "distance", "bound"])
        for row in result.rows:
            series.append(row.t, row.distance, row.bound)
        report.scalars["contraction_epsilon"] = result.epsilon

    def refinement(
        self,
        report: DiagnosticsReport,
        trajectory: Trajectory,
        measure: MeasureSpec,
        region: RegionSpec,
        config: EvolutionConfig,
        axis: Sequence[float],
    ) -> None:
        """Repeat the fitted constants on a grid of ``refinement_N`` nodes and record both values."""
        size = self._settings.refinement_N
        if size is None:
            return
        refined_grid = SpectralGrid(R_max=config.grid.R_max, N=size)
        self._logger.info(f"Diagnostics: refinement study on {size}^3 nodes")
        refined = evolve(measure, replace(config, grid=refined_grid), logger=self._logger)
        intervals: dict[str, Any] = {"N": [config.grid.N, size]}
        if self._settings.coercivity and not measure.is_single_dirac():
            coarse = report.scalars.get("coercivity_constant")
            _, certificate = self.coercivity_constant(refined, measure, axis)
            intervals["coercivity_constant"] = [coarse, certificate.constant]
        if self._settings.gaps and "gap_slope" in report.scalars:
            times = [t for t in self._settings.gap_times if t <= refined.final.time]
            intervals["gap_slope"] = [report.scalars["gap_slope"], gap_growth_rate(refined, region, times).slope]
        report.scalars["refinement"] = intervals
