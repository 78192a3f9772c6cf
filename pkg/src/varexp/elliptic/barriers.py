"""Sub- and supersolutions that bracket the Euler-scheme iterates, and the stationary problem."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from varexp.elliptic.checks import ordering_check
from varexp.elliptic.problems import BarrierProblem, SourceF, default_initial_guess
from varexp.elliptic.solver import minimize
from varexp.errors import BracketError, PreconditionError
from varexp.grid import (
    Coefficient,
    GridFunction,
    Quadrature,
    coefficient,
    quadrature_of,
    require_same_grid,
    sample_points,
)
from varexp.models import SolveReport, SolverOptions
from varexp.telemetry.logger import log_check
from varexp.vxspace import ExponentField

logger = logging.getLogger("varexp")

MU_GRID: tuple[float, ...] = tuple(2.0**-k for k in range(21))
K_GRID: tuple[float, ...] = tuple(2.0**k for k in range(21))
BRACKET_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BracketFunction:
    """A barrier w together with the parameter (mu or K) that produced it."""

    kind: Literal["sub", "sup"]
    parameter: float
    solution: GridFunction
    report: SolveReport


def _warm_start(v0: GridFunction) -> GridFunction:
    if v0.dirichlet_zero and np.all(v0.interior > 0.0):
        return v0
    return default_initial_guess(v0.grid)


def build_subsolution(
    p: ExponentField,
    h0: Coefficient,
    q: float,
    f: SourceF,
    v0: GridFunction,
    mu_grid: Sequence[float] = MU_GRID,
    opts: SolverOptions | None = None,
    tol: float = BRACKET_TOL,
) -> BracketFunction:
    """Largest mu in ``mu_grid`` whose barrier lies below v0.

    The barrier solves -Delta_p w = mu (h0 w^{q-1} + f(x, w)) with the
    quadrature of ``h0``.
    """
    require_same_grid(h0, v0)
    if not mu_grid or any(mu <= 0.0 for mu in mu_grid):
        raise PreconditionError("mu_grid must be a nonempty list of positive values")
    for mu in sorted(mu_grid, reverse=True):
        prob = BarrierProblem(
            p=p,
            c=h0.with_values(mu * h0.values),
            q=q,
            mu=mu,
            f=f,
            K=0.0,
            quadrature=quadrature_of(h0),
        )
        report = minimize(prob, _warm_start(v0), opts, label=f"subsolution mu={mu:g}")
        if not (report.converged and report.positivity):
            logger.debug("subsolution at mu=%g rejected: converged=%s", mu, report.converged)
            continue
        if ordering_check(v0, report.solution, tol):
            log_check("subsolution", True, {"mu": mu})
            return BracketFunction("sub", mu, report.solution, report)
    log_check("subsolution", False, {"mu_min": min(mu_grid)})
    raise BracketError(f"no mu in grid (down to {min(mu_grid):g}) gives a subsolution below v0")


def build_supersolution(
    p: ExponentField,
    h_sup: float,
    q: float,
    f: SourceF,
    v0: GridFunction,
    k_grid: Sequence[float] = K_GRID,
    opts: SolverOptions | None = None,
    tol: float = BRACKET_TOL,
    quadrature: Quadrature = "midpoint",
) -> BracketFunction:
    """Smallest K in ``k_grid`` whose barrier lies above v0.

    The barrier solves -Delta_p w = |h|_inf w^{q-1} + f(x, w) + K.
    """
    if h_sup < 0.0:
        raise PreconditionError(f"h_sup must be nonnegative, got {h_sup}")
    if not k_grid or any(k <= 0.0 for k in k_grid):
        raise PreconditionError("k_grid must be a nonempty list of positive values")
    grid = v0.grid
    c = coefficient(grid, np.full_like(sample_points(grid, quadrature), h_sup), quadrature)
    previous: GridFunction | None = None
    for K in sorted(k_grid):
        prob = BarrierProblem(p=p, c=c, q=q, mu=1.0, f=f, K=K, quadrature=quadrature)
        init = previous if previous is not None else _warm_start(v0)
        report = minimize(prob, init, opts, label=f"supersolution K={K:g}")
        if not (report.converged and report.positivity):
            logger.debug("supersolution at K=%g rejected: converged=%s", K, report.converged)
            continue
        previous = report.solution
        if ordering_check(report.solution, v0, tol):
            log_check("supersolution", True, {"K": K})
            return BracketFunction("sup", K, report.solution, report)
    log_check("supersolution", False, {"K_max": max(k_grid)})
    raise BracketError(f"no K in grid (up to {max(k_grid):g}) gives a supersolution above v0")


def solve_stationary(
    p: ExponentField,
    h: Coefficient,
    q: float,
    f: SourceF,
    u_init: GridFunction | None = None,
    opts: SolverOptions | None = None,
) -> SolveReport:
    """Positive solution of -Delta_p v = h v^{q-1} + f(x, v), a fixed point of the Euler scheme."""
    prob = BarrierProblem(p=p, c=h, q=q, mu=1.0, f=f, K=0.0, quadrature=quadrature_of(h))
    return minimize(prob, u_init or default_initial_guess(h.grid), opts, label="stationary")
