"""Measurable counterparts of the coercivity, gap, smoothing and moment estimates."""

from bobylev_flow.diagnostics.coercivity import (
    CoercivityFunctionals,
    coercivity_functionals,
    static_degenerate_coercivity,
)
from bobylev_flow.diagnostics.entropy import EntropyResult, entropy
from bobylev_flow.diagnostics.gaps import gap_growth_rate, gap_time_derivative, kappa_estimate, pointwise_gap
from bobylev_flow.diagnostics.moments import moment_propagation_fit, moments_and_energy, v_moment
from bobylev_flow.diagnostics.norms import (
    WeightSpec,
    decay_exponent,
    gronwall_rate,
    holder_bound_check,
    weight_commutator_bound,
    weighted_energy_budget,
    weighted_norm,
)
from bobylev_flow.diagnostics.regions import AnnulusDisk, Band, Cone, PolarCap, RegionSpec, region_from_data
from bobylev_flow.diagnostics.report import DiagnosticsReport, load_report, series_table
from bobylev_flow.diagnostics.runner import DiagnosticsRunner

__all__ = [
    "AnnulusDisk",
    "Band",
    "CoercivityFunctionals",
    "Cone",
    "DiagnosticsReport",
    "DiagnosticsRunner",
    "EntropyResult",
    "PolarCap",
    "RegionSpec",
    "WeightSpec",
    "coercivity_functionals",
    "decay_exponent",
    "entropy",
    "gap_growth_rate",
    "gap_time_derivative",
    "gronwall_rate",
    "holder_bound_check",
    "kappa_estimate",
    "load_report",
    "moment_propagation_fit",
    "moments_and_energy",
    "pointwise_gap",
    "region_from_data",
    "series_table",
    "static_degenerate_coercivity",
    "v_moment",
    "weight_commutator_bound",
    "weighted_energy_budget",
    "weighted_norm",
]
