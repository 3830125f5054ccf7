"""Mean, energy and ⟨v⟩-moments read off ψ near the origin."""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy
from scipy.optimize import brentq

from bobylev_flow.diagnostics.entropy import density
from bobylev_flow.grid import CharField

# fourth-order central stencils on offsets -2..2
_FIRST = numpy.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_SECOND = numpy.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def _axis_lines(field: CharField) -> list[numpy.ndarray]:
    grid = field.grid
    if grid.N < 5:
        raise ValueError(f"Origin finite differences need N >= 5, got N = {grid.N}")
    c = grid.centre
    window = slice(c - 2, c + 3)
    return [field.values[window, c, c], field.values[c, window, c], field.values[c, c, window]]


def mean_vector(field: CharField) -> numpy.ndarray:
    """m_j = −∂_j Im ψ(0)."""
    h = field.grid.spacing
    return numpy.array([-float(_FIRST @ line.imag) / h for line in _axis_lines(field)])


def moments_and_energy(field: CharField, order: int) -> float:
    """
    Order 1: |mean|; order 2: energy ∫|v|² = −Δ Re ψ(0).

    Raises:
        ValueError: If ``order`` is not 1 or 2.
    """
    if order == 1:
        return float(numpy.linalg.norm(mean_vector(field)))
    if order == 2:
        h = field.grid.spacing
        return -sum(float(_SECOND @ line.real) for line in _axis_lines(field)) / h ** 2
    raise ValueError(f"Moment order must be 1 or 2, got {order}")


def analytic_moment(field: CharField, order: int) -> float | None:
    """Closed-form counterpart of :func:`moments_and_energy` while the field carries its datum."""
    spec = field.exact
    if spec is None:
        return None
    if order == 1:
        return float(numpy.linalg.norm(spec.mean()))
    return spec.energy()


def v_moment(field: CharField) -> float:
    """∫⟨v⟩ dF: from the datum at t = 0, from the clipped inverse transform otherwise."""
    spec = field.exact
    if spec is not None:
        return spec.expectation(lambda v: numpy.sqrt(1.0 + numpy.sum(v ** 2, axis=-1)))
    f = density(field)
    weights = numpy.sqrt(1.0 + numpy.sum(f.velocities() ** 2, axis=-1))
    return float(numpy.sum(numpy.clip(f.values, 0.0, None) * weights) * f.cell)


@dataclass(frozen=True)
class MomentPropagation:
    """Smallest C with m(t) ≤ C e^{Ct} m(0) over the series."""

    constant: float
    worst_time: float


def moment_propagation_fit(series: Sequence[tuple[float, float]]) -> MomentPropagation:
    """
    Fit the moment-propagation constant of a positive (t, m) series.

    Raises:
        ValueError: If the series is empty or m(0) is not positive.
    """
    records = sorted(series)
    if not records or records[0][1] <= 0.0:
        raise ValueError("moment_propagation_fit needs a series starting with a positive moment")
    _, initial = records[0]
    constant, worst = 0.0, records[0][0]
    for t, value in records:
        log_ratio = math.log(value / initial)
        # log C + C t is increasing in C; bracket its root
        def excess(c: float, t: float = t, log_ratio: float = log_ratio) -> float:
            return math.log(c) + c * t - log_ratio

        if excess(constant if constant > 0.0 else 1e-300) >= 0.0:
            continue
        upper = max(1.0, abs(log_ratio) + 1.0)
        while excess(upper) < 0.0:
            upper *= 2.0
        constant, worst = brentq(excess, 1e-300 if constant == 0.0 else constant, upper), t
    return MomentPropagation(constant=constant, worst_time=worst)
