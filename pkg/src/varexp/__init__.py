"""varexp: numerics for the variable-exponent p(x)-Laplacian.

Luxemburg norms and modulars, Picone and Diaz-Saa checks for p(x)-homogeneous
operators, energy solvers for quasilinear elliptic problems and an implicit
Euler scheme for fast diffusion with contraction verification.

Usage:
    from varexp import build_uniform, parse, ExponentField, Torsion, minimize

    grid = build_uniform(0.0, 1.0, 256)
    p = ExponentField.from_expression(parse("2 + 0.5*x"), grid)
    report = minimize(Torsion(p=p, K=1.0))
"""

from varexp.elliptic import (
    EpsPerturbed,
    FdeStep,
    ReactionPQ,
    Torsion,
    energy,
    minimize,
    residual,
    uniqueness_probe,
)
from varexp.errors import (
    BracketError,
    ConfigError,
    HypothesisError,
    PreconditionError,
    SolverError,
    VarexpError,
)
from varexp.expr import Expression, parse
from varexp.fde import FdeConfig, comparison_check, contraction_check, run_fde
from varexp.grid import CellField, Grid, GridFunction, build_uniform
from varexp.kernels import get_kernel, register_kernel
from varexp.models import SolveReport, SolverOptions, Verdict
from varexp.picone import diaz_saa_check, picone_gap
from varexp.vxspace import ExponentField, luxemburg_norm, modular

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "CellField",
    "ConfigError",
    "EpsPerturbed",
    "ExponentField",
    "Expression",
    "FdeConfig",
    "FdeStep",
    "Grid",
    "GridFunction",
    "HypothesisError",
    "PreconditionError",
    "ReactionPQ",
    "SolveReport",
    "SolverError",
    "SolverOptions",
    "Torsion",
    "VarexpError",
    "Verdict",
    "build_uniform",
    "comparison_check",
    "contraction_check",
    "diaz_saa_check",
    "energy",
    "get_kernel",
    "luxemburg_norm",
    "minimize",
    "modular",
    "parse",
    "picone_gap",
    "register_kernel",
    "residual",
    "run_fde",
    "uniqueness_probe",
    "__version__",
]
