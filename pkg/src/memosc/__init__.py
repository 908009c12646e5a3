"""Memory-damped oscillator toolkit: exact classical maps, quantum propagators,
and the oracles that cross-check them."""

from .core import (
    ANALYTIC_TOL,
    ORACLE_TOL,
    DomainError,
    EvolutionMatrix,
    KernelKind,
    ModelKind,
    OscillatorParams,
    PhaseState,
    derived_frequency,
    validate_params,
)
from .classical import (
    CompositionDefect,
    MassFunction,
    asymptotic_matrix,
    asymptotic_state,
    composition_defect,
    evolution_matrix,
    evolve_state,
    kappa,
    mass_at,
    newton_rhs,
    pure_damping_matrix,
    rk4_state,
    verify_kappa_riccati,
)
from .quantum import (
    DensityProfile,
    GaussianPacket,
    KernelCompositionDefect,
    QuadraticKernel,
    XpHamiltonianCoeffs,
    appendix_coeffs,
    apply_kernel,
    asymptotic_density,
    asymptotic_dispersion,
    b_factor_phase,
    center_closed_form,
    compose_kernels,
    density_closed_form,
    dispersion_closed_form,
    free_particle_kernel,
    kernel,
    mean_position_residual,
    numeric_tdse_oracle,
    quantum_composition_defect,
    verify_schrodinger,
)
from .oracle import GridSpec, IntegratorSpec, finite_difference, quadrature, rk4_integrate

__version__ = "0.1.0"

__all__ = [
    "ANALYTIC_TOL",
    "ORACLE_TOL",
    "DomainError",
    "EvolutionMatrix",
    "KernelKind",
    "ModelKind",
    "OscillatorParams",
    "PhaseState",
    "derived_frequency",
    "validate_params",
    "CompositionDefect",
    "MassFunction",
    "asymptotic_matrix",
    "asymptotic_state",
    "composition_defect",
    "evolution_matrix",
    "evolve_state",
    "kappa",
    "mass_at",
    "newton_rhs",
    "pure_damping_matrix",
    "rk4_state",
    "verify_kappa_riccati",
    "DensityProfile",
    "GaussianPacket",
    "KernelCompositionDefect",
    "QuadraticKernel",
    "XpHamiltonianCoeffs",
    "appendix_coeffs",
    "apply_kernel",
    "asymptotic_density",
    "asymptotic_dispersion",
    "b_factor_phase",
    "center_closed_form",
    "compose_kernels",
    "density_closed_form",
    "dispersion_closed_form",
    "free_particle_kernel",
    "kernel",
    "mean_position_residual",
    "numeric_tdse_oracle",
    "quantum_composition_defect",
    "verify_schrodinger",
    "GridSpec",
    "IntegratorSpec",
    "finite_difference",
    "quadrature",
    "rk4_integrate",
]
