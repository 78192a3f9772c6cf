"""Implicit Euler scheme for fast diffusion and its verification harness."""

from varexp.fde.scheme import (
    FdeConfig,
    FdeTrajectory,
    Interpolants,
    average_forcing,
    euler_step,
    initial_floor,
    interpolants,
    jensen_check,
    run_fde,
    self_convergence_study,
    validate_fde_config,
)
from varexp.fde.verify import (
    comparison_check,
    contraction_check,
    energy_estimate,
    interpolant_distance,
)

__all__ = [
    "FdeConfig",
    "FdeTrajectory",
    "Interpolants",
    "average_forcing",
    "comparison_check",
    "contraction_check",
    "energy_estimate",
    "euler_step",
    "initial_floor",
    "interpolant_distance",
    "interpolants",
    "jensen_check",
    "run_fde",
    "self_convergence_study",
    "validate_fde_config",
]
