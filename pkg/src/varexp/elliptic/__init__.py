"""Elliptic problems: discrete energies, descent solver, barriers and conclusion checks."""

from varexp.elliptic.barriers import (
    BracketFunction,
    build_subsolution,
    build_supersolution,
    solve_stationary,
)
from varexp.elliptic.checks import (
    elliptic_contraction_check,
    hidden_convexity_scan,
    ordering_check,
    positivity_and_hopf_check,
    ray_convexity_scan,
)
from varexp.elliptic.energy import (
    energy,
    energy_barrier,
    energy_eps,
    energy_fde_step,
    energy_reaction,
    energy_torsion,
    residual,
)
from varexp.elliptic.problems import (
    BarrierProblem,
    EllipticProblem,
    EpsPerturbed,
    FdeStep,
    ReactionPQ,
    SourceF,
    Torsion,
    a_priori_bound,
    check_hypotheses,
    default_initial_guess,
)
from varexp.elliptic.solver import minimize, solve_torsion, uniqueness_probe

__all__ = [
    "BarrierProblem",
    "BracketFunction",
    "EllipticProblem",
    "EpsPerturbed",
    "FdeStep",
    "ReactionPQ",
    "SourceF",
    "Torsion",
    "a_priori_bound",
    "build_subsolution",
    "build_supersolution",
    "check_hypotheses",
    "default_initial_guess",
    "elliptic_contraction_check",
    "energy",
    "energy_barrier",
    "energy_eps",
    "energy_fde_step",
    "energy_reaction",
    "energy_torsion",
    "hidden_convexity_scan",
    "minimize",
    "ordering_check",
    "positivity_and_hopf_check",
    "ray_convexity_scan",
    "residual",
    "solve_stationary",
    "solve_torsion",
    "uniqueness_probe",
]
