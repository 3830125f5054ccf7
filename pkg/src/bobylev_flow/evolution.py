"""
Time integration of ∂ₜψ = Q(ψ) on the grid ball, checkpointing and the
cutoff-sequence convergence study.
"""

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, TextIO

import numpy

from bobylev_flow.collision import CollisionOperator, SphereQuadrature
from bobylev_flow.constants import (
    DEFAULT_TOL_DRIFT,
    INTEGRATORS,
    MAX_HALVINGS,
    SPLIT_BOUND_FACTOR,
    STABILITY_FACTOR,
)
from bobylev_flow.grid import CharField, SpectralGrid, write_field
from bobylev_flow.kernel import AngularKernel, lambda_alpha, sphere_moment, total_cross_section
from bobylev_flow.measures import MeasureSpec, kalpha_distance, kalpha_membership
from common.constants import FIELD_SUFFIX
from common.logger import Logger
from common.utils import format_float

MONITOR_COLUMNS = ("t", "max_abs_psi", "hermitian_drift", "origin_value", "dt")
ALPHA_CANDIDATES = (2.0, 1.75, 1.5, 1.25, 1.0, 0.75, 0.5, 0.25)


@dataclass(frozen=True)
class EvolutionConfig:
    """
    Attributes:
        t_end: Final time.
        kernel: Angular kernel; a cutoff selects the direct RHS, otherwise the split one.
        grid: Spectral grid.
        quad: Sphere quadrature.
        dt: Requested step, capped by :func:`stable_dt`; None uses the cap.
        integrator: ``"rk4"`` or ``"heun"``.
        checkpoint_times: Increasing times in (0, t_end] at which snapshots are kept.
        tol_drift: Drift tolerance; steps with max|ψ| > 1 + 10·tol_drift are rejected.
        max_halvings: Rejections tolerated before aborting.
        alpha: 𝒦^α exponent for the membership check and the step policy; None picks
            the largest admissible value.
        workers: RHS worker threads.
    """

    t_end: float
    kernel: AngularKernel
    grid: SpectralGrid = SpectralGrid()
    quad: SphereQuadrature = SphereQuadrature()
    dt: float | None = None
    integrator: str = "rk4"
    checkpoint_times: tuple[float, ...] = ()
    tol_drift: float = DEFAULT_TOL_DRIFT
    max_halvings: int = MAX_HALVINGS
    alpha: float | None = None
    workers: int | None = None

    def __post_init__(self) -> None:
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"Unknown integrator {self.integrator!r}; expected one of {', '.join(INTEGRATORS)}")
        times = tuple(float(t) for t in self.checkpoint_times)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"checkpoint_times must be strictly increasing, got {list(times)}")
        if times and (times[0] <= 0.0 or times[-1] > self.t_end):
            raise ValueError(f"checkpoint_times must lie in (0, t_end = {self.t_end}]")
        object.__setattr__(self, "checkpoint_times", times)

    @property
    def stops(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.checkpoint_times) | {self.t_end}))


@dataclass(frozen=True)
class MonitorRecord:
    t: float
    max_abs_psi: float
    hermitian_drift: float
    origin_value: float
    dt: float

    @classmethod
    def of(cls, field: CharField, dt: float) -> "MonitorRecord":
        return cls(
            t=field.time,
            max_abs_psi=field.max_abs(),
            hermitian_drift=field.hermitian_drift(),
            origin_value=field.origin_value.real,
            dt=dt,
        )

    def row(self) -> list[str]:
        return [format_float(getattr(self, name)) for name in MONITOR_COLUMNS]


@dataclass
class Trajectory:
    """Snapshots (t = 0 first, then every checkpoint) and per-step monitors."""

    snapshots: list[CharField] = field(default_factory=list)
    monitors: list[MonitorRecord] = field(default_factory=list)
    policy: dict[str, Any] = field(default_factory=dict)

    @property
    def times(self) -> list[float]:
        return [snapshot.time for snapshot in self.snapshots]

    @property
    def final(self) -> CharField:
        return self.snapshots[-1]

    def at(self, t: float) -> CharField:
        """Snapshot whose time is closest to ``t``."""
        if not self.snapshots:
            raise ValueError("Trajectory is empty")
        return min(self.snapshots, key=lambda snapshot: abs(snapshot.time - t))

    def append(self, snapshot: CharField) -> None:
        if self.snapshots and snapshot.time <= self.snapshots[-1].time:
            raise ValueError(f"Snapshot times must increase: {snapshot.time} after {self.snapshots[-1].time}")
        self.snapshots.append(snapshot)


class IntegrationAbort(RuntimeError):
    """Time stepping gave up; carries the last accepted field and the partial trajectory."""

    def __init__(self, message: str, last_good: CharField, trajectory: Trajectory | None = None):
        super().__init__(message)
        self.last_good = last_good
        self.trajectory = trajectory


class TrajectoryWriter:
    """
    Writes checkpoint dumps ``<run_id>_t<time>.bobk`` and appends monitor rows
    to ``<run_id>_monitors.csv``.
    """

    def __init__(self, logger: Logger, out_dir: Path, run_id: str):
        self._logger = logger
        self._out_dir = Path(out_dir)
        self._run_id = run_id
        self._out_dir.mkdir(parents=True, exist_ok=True)
        self.monitors_path = self._out_dir / f"{run_id}_monitors.csv"
        self._handle: TextIO | None = open(self.monitors_path, "w", newline="", encoding="utf-8")
        self._csv = csv.writer(self._handle)
        self._csv.writerow(MONITOR_COLUMNS)
        self.checkpoints: list[Path] = []

    def __enter__(self) -> "TrajectoryWriter":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def checkpoint_path(self, t: float) -> Path:
        return self._out_dir / f"{self._run_id}_t{t:.6f}{FIELD_SUFFIX}"

    def write_checkpoint(self, field: CharField) -> Path:
        path = write_field(field, self.checkpoint_path(field.time))
        self.checkpoints.append(path)
        self._logger.debug(f"Checkpoint written: {path.name}")
        return path

    def write_monitor(self, record: MonitorRecord) -> None:
        if self._handle is None:
            raise ValueError("TrajectoryWriter is closed")
        self._csv.writerow(record.row())
        self._handle.flush()

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None


def admissible_alpha(measure: MeasureSpec, kernel: AngularKernel, alpha: float | None = None) -> float:
    """
    Largest α ∈ (2s, 2] from a fixed ladder (or ``alpha`` itself) for which ψ₀ ∈ 𝒦^α.

    Raises:
        ValueError: If no admissible exponent exists.
    """
    floor = 2.0 * kernel.s
    candidates = (alpha,) if alpha is not None else (*ALPHA_CANDIDATES, min(2.0, floor + 0.05))
    for candidate in candidates:
        if candidate <= floor:
            continue
        if kalpha_membership(measure, candidate).member:
            return candidate
    raise ValueError(
        f"Initial datum is not in K^alpha for any alpha in (2s, 2] = ({floor:g}, 2]"
        + (f" (tried alpha = {alpha:g})" if alpha is not None else "")
        + "; the existence theory does not apply"
    )


def stable_dt(config: EvolutionConfig, field: CharField, alpha: float | None = None) -> float:
    """
    Step-size cap 0.5/Λ.

    Λ is the total cross section for a cutoff kernel, otherwise
    7‖1−ψ₀‖_α R_max^α times the sphere moment of order α. A field with
    ‖1−ψ₀‖_α = 0 has no cap (t_end is returned).
    """
    kernel = config.kernel
    if kernel.is_cutoff:
        rate = total_cross_section(kernel)
    else:
        exponent = alpha if alpha is not None else (config.alpha or 2.0)
        norm = kalpha_distance(field, 1.0, exponent, field.grid).value
        if not math.isfinite(norm):
            raise ValueError(f"Step policy needs a finite ||1 - psi0||_alpha at alpha = {exponent:g}")
        rate = SPLIT_BOUND_FACTOR * norm * field.grid.R_max ** exponent * sphere_moment(kernel, exponent)
    if rate <= 0.0:
        return config.t_end
    return STABILITY_FACTOR / rate


def _pinned(field: CharField, values: numpy.ndarray, time: float) -> CharField:
    values = numpy.array(values)
    values[field.grid.origin_index] = 1.0
    return field.with_values(values, time)


def _attempt(field: CharField, dt: float, config: EvolutionConfig, operator: CollisionOperator) -> CharField:
    base = field.without_spec()
    y = base.values
    k1 = operator.evaluate(base)
    if config.integrator == "heun":
        k2 = operator.evaluate(_pinned(base, y + dt * k1, base.time + dt))
        update = 0.5 * dt * (k1 + k2)
    else:
        half = base.time + 0.5 * dt
        k2 = operator.evaluate(_pinned(base, y + 0.5 * dt * k1, half))
        k3 = operator.evaluate(_pinned(base, y + 0.5 * dt * k2, half))
        k4 = operator.evaluate(_pinned(base, y + dt * k3, base.time + dt))
        update = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _pinned(base, y + update, base.time + dt)


def _acceptable(field: CharField, tol_drift: float) -> bool:
    peak = field.max_abs()
    return math.isfinite(peak) and peak <= 1.0 + 10.0 * tol_drift


def step(
    field: CharField,
    dt: float,
    config: EvolutionConfig,
    operator: CollisionOperator | None = None,
    *,
    logger: Logger | None = None,
    _depth: int = 0,
) -> CharField:
    """
    Advance ``field`` by ``dt`` with the configured Runge-Kutta scheme.

    A result with max|ψ| > 1 + 10·tol_drift is rejected and the interval is
    covered by two steps of dt/2 instead, down to ``max_halvings`` levels.
    The origin node is pinned to 1.

    Raises:
        ValueError: If dt is not positive.
        IntegrationAbort: When the halving limit is reached.
    """
    if not dt > 0.0:
        raise ValueError(f"Step size must be positive, got {dt}")
    operator = operator or CollisionOperator(logger, config.kernel, config.quad, workers=config.workers)
    candidate = _attempt(field, dt, config, operator)
    if _acceptable(candidate, config.tol_drift):
        return candidate
    if _depth >= config.max_halvings:
        raise IntegrationAbort(
            f"Step at t = {field.time:.6g} rejected after {config.max_halvings} halvings "
            f"(max |psi| = {candidate.max_abs():.12g})",
            last_good=field,
        )
    if logger is not None:
        logger.warning(
            f"Step rejected at t = {field.time:.6g}: max |psi| = {candidate.max_abs():.12g}; halving dt to {0.5 * dt:.6g}"
        )
    middle = step(field, 0.5 * dt, config, operator, logger=logger, _depth=_depth + 1)
    return step(middle, 0.5 * dt, config, operator, logger=logger, _depth=_depth + 1)


def evolve(
    initial: MeasureSpec,
    config: EvolutionConfig,
    *,
    logger: Logger | None = None,
    writer: TrajectoryWriter | None = None,
) -> Trajectory:
    """
    Solve the Cauchy problem from ψ₀ of ``initial`` up to ``config.t_end``.

    Raises:
        ValueError: If ψ₀ is not in 𝒦^α for any α ∈ (2s, 2].
        IntegrationAbort: If a step cannot be completed; the exception carries
            the partial trajectory.
    """
    alpha = admissible_alpha(initial, config.kernel, config.alpha)
    start = CharField.from_measure(initial, config.grid)
    cap = stable_dt(config, start, alpha)
    dt = min(config.dt, cap) if config.dt is not None else cap
    if config.dt is not None and config.dt > cap and logger is not None:
        logger.info(f"Requested dt = {config.dt:.6g} capped to {cap:.6g} by the stability heuristic")
    operator = CollisionOperator(logger, config.kernel, config.quad, workers=config.workers)

    trajectory = Trajectory(
        policy={
            "integrator": config.integrator,
            "alpha": alpha,
            "dt_requested": config.dt,
            "dt_cap": cap,
            "dt": dt,
            "stability_factor": STABILITY_FACTOR,
            "rhs": operator.describe(),
            "steps": 0,
        }
    )
    trajectory.append(start)
    _record(trajectory, writer, MonitorRecord.of(start, 0.0))
    if writer is not None:
        writer.write_checkpoint(start)

    current = start.without_spec()
    checkpoints = set(config.checkpoint_times)
    for stop in config.stops:
        while current.time < stop:
            remaining = stop - current.time
            h = remaining if remaining <= dt * (1.0 + 1e-6) else dt
            try:
                advanced = step(current, h, config, operator, logger=logger)
            except IntegrationAbort as e:
                e.trajectory = trajectory
                if writer is not None:
                    writer.write_checkpoint(e.last_good)
                if logger is not None:
                    logger.error(f"Integration aborted: {e}")
                raise
            landing = stop if h == remaining else advanced.time
            current = advanced.with_values(advanced.values, landing)
            trajectory.policy["steps"] += 1
            _record(trajectory, writer, MonitorRecord.of(current, h))
        if stop in checkpoints or stop == config.t_end:
            trajectory.append(current)
            if writer is not None:
                writer.write_checkpoint(current)
            if logger is not None:
                logger.info(f"Reached t = {stop:.6g} (max |psi| = {current.max_abs():.12g})")
    return trajectory


def _record(trajectory: Trajectory, writer: TrajectoryWriter | None, record: MonitorRecord) -> None:
    trajectory.monitors.append(record)
    if writer is not None:
        writer.write_monitor(record)


@dataclass(frozen=True)
class ConvergenceRow:
    level: float
    next_level: float
    t: float
    distance: float


@dataclass
class ConvergenceTable:
    """Sup-node distances between trajectories of consecutive cutoff levels."""

    levels: list[float]
    rows: list[ConvergenceRow]
    flagged: list[ConvergenceRow]
    trajectories: dict[float, Trajectory] = field(repr=False, default_factory=dict)

    @property
    def monotone(self) -> bool:
        return not self.flagged

    def distances_at(self, t: float) -> list[float]:
        return [row.distance for row in self.rows if abs(row.t - t) <= 1e-12]


def cutoff_convergence(
    initial: MeasureSpec,
    n_list: list[float],
    config: EvolutionConfig,
    *,
    logger: Logger | None = None,
    tolerance: float = 1e-12,
) -> ConvergenceTable:
    """
    Evolve with b_n = min{b, n} for each level and compare consecutive trajectories.

    A distance that grows with n beyond ``tolerance`` is flagged.

    Raises:
        ValueError: If ``n_list`` is not strictly increasing.
    """
    levels = [float(n) for n in n_list]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError(f"Cutoff levels must be strictly increasing, got {levels}")
    trajectories = {
        level: evolve(initial, replace(config, kernel=config.kernel.with_cutoff(level)), logger=logger)
        for level in levels
    }
    rows = []
    for level, next_level in zip(levels, levels[1:]):
        lower, upper = trajectories[level], trajectories[next_level]
        for snapshot in lower.snapshots[1:]:
            rows.append(ConvergenceRow(level, next_level, snapshot.time, snapshot.distance(upper.at(snapshot.time))))
    flagged = []
    for t in sorted({row.t for row in rows}):
        series = [row for row in rows if row.t == t]
        for previous, following in zip(series, series[1:]):
            if following.distance > previous.distance + tolerance:
                flagged.append(following)
                if logger is not None:
                    logger.warning(
                        f"Non-monotone cutoff distances at t = {t:.6g}: "
                        f"{previous.distance:.3e} (n = {previous.next_level:g}) -> "
                        f"{following.distance:.3e} (n = {following.next_level:g})"
                    )
    return ConvergenceTable(levels=levels, rows=rows, flagged=flagged, trajectories=trajectories)


@dataclass(frozen=True)
class ContractionRow:
    t: float
    distance: float
    bound: float


@dataclass
class ContractionReport:
    """‖ψ(t) − φ(t)‖_α against e^{λ_α t}‖ψ₀ − φ₀‖_α at common snapshot times."""

    alpha: float
    rate: float
    initial_distance: float
    rows: list[ContractionRow]

    @property
    def epsilon(self) -> float:
        """Largest relative excess over the bound (0 when it holds everywhere)."""
        excess = [row.distance / row.bound - 1.0 for row in self.rows if row.bound > 0.0]
        excess += [math.inf for row in self.rows if row.bound == 0.0 and row.distance > 1e-14]
        return max([0.0, *excess])

    def holds(self, epsilon: float = 0.05) -> bool:
        return self.epsilon <= epsilon


def contraction_check(
    trajectory_a: Trajectory,
    trajectory_b: Trajectory,
    kernel: AngularKernel,
    alpha: float,
) -> ContractionReport:
    """
    Compare two trajectories with the 𝒦^α contraction estimate.

    Raises:
        ValueError: If alpha ≤ 2s for a non-cutoff kernel or the grids differ.
    """
    first_a, first_b = trajectory_a.snapshots[0], trajectory_b.snapshots[0]
    if first_a.grid != first_b.grid:
        raise ValueError("Trajectories live on different grids")
    rate = lambda_alpha(kernel, alpha)
    initial = kalpha_distance(first_a, first_b, alpha, first_a.grid).value
    rows = []
    for snapshot in trajectory_a.snapshots[1:]:
        other = trajectory_b.at(snapshot.time)
        if abs(other.time - snapshot.time) > 1e-12:
            continue
        distance = kalpha_distance(snapshot, other, alpha, snapshot.grid).value
        rows.append(ContractionRow(snapshot.time, distance, math.exp(rate * snapshot.time) * initial))
    return ContractionReport(alpha=alpha, rate=rate, initial_distance=initial, rows=rows)
