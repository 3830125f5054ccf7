"""bobylev-flow package.

Fourier-space (Bobylev) solver for the spatially homogeneous Boltzmann
equation with Maxwellian molecules and non-cutoff angular kernels, plus the
diagnostics that turn its smoothing estimates into measurable inequalities.
"""

from bobylev_flow.collision import CollisionOperator, SphereQuadrature, rhs_direct, rhs_regularized, xi_pm
from bobylev_flow.evolution import EvolutionConfig, IntegrationAbort, Trajectory, evolve, step
from bobylev_flow.grid import CharField, SpectralGrid, interpolate, read_field, write_field
from bobylev_flow.kernel import AngularKernel, cancellation_constant, lambda_alpha, symmetrized_b
from bobylev_flow.measures import (
    DiracSum,
    GaussianMixture,
    LineMeasure,
    MeasureSpec,
    TabulatedDensity,
    characteristic,
    kalpha_distance,
    kalpha_membership,
)

__all__ = [
    "AngularKernel",
    "CharField",
    "CollisionOperator",
    "DiracSum",
    "EvolutionConfig",
    "GaussianMixture",
    "IntegrationAbort",
    "LineMeasure",
    "MeasureSpec",
    "SpectralGrid",
    "SphereQuadrature",
    "TabulatedDensity",
    "Trajectory",
    "cancellation_constant",
    "characteristic",
    "evolve",
    "interpolate",
    "kalpha_distance",
    "kalpha_membership",
    "lambda_alpha",
    "read_field",
    "rhs_direct",
    "rhs_regularized",
    "step",
    "symmetrized_b",
    "write_field",
    "xi_pm",
]
