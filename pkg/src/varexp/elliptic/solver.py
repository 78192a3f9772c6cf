"""Preconditioned steepest descent with Armijo backtracking on the discrete energies."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from functools import partial

import numpy as np
import numpy.typing as npt
from scipy.linalg import solve_banded

from varexp.elliptic.checks import positivity_and_hopf_check
from varexp.elliptic.energy import curvature_bands, energy_values, residual_values
from varexp.elliptic.problems import (
    EllipticProblem,
    Torsion,
    a_priori_bound,
    default_initial_guess,
)
from varexp.errors import PreconditionError, SolverError
from varexp.grid import Grid, GridFunction
from varexp.models import SolveReport, SolverOptions, UniquenessReport, Verdict
from varexp.pipeline import run_independent_sync
from varexp.telemetry.logger import log_check, log_solve_report
from varexp.telemetry.otel import record_solve, solver_span
from varexp.vxspace import ExponentField

logger = logging.getLogger("varexp")

FloatArray = npt.NDArray[np.float64]

UNIQUENESS_THRESHOLD = 1e-6
LINF_SLACK = 1e-9


def _direction(prob: EllipticProblem, u: FloatArray, r: FloatArray, metric: str) -> FloatArray:
    if metric == "diagonal":
        return -r / prob.grid.h
    bands = curvature_bands(prob, u)
    d: FloatArray = solve_banded((1, 1), bands, -r)
    if not np.all(np.isfinite(d)):
        return -r / prob.grid.h
    return d


def _finish(
    prob: EllipticProblem,
    u: FloatArray,
    iterations: int,
    energy: float,
    res: float,
    tol: float,
    converged: bool,
    message: str,
    history: list[float],
) -> SolveReport:
    solution = GridFunction(prob.grid, u, True)
    pos = positivity_and_hopf_check(solution)
    bound = a_priori_bound(prob)
    bound_ok = True
    if bound is not None:
        bound_ok = bool(
            np.all(u >= -LINF_SLACK) and np.all(u <= bound + LINF_SLACK * (1.0 + bound))
        )
    return SolveReport(
        family=prob.family,
        solution=solution,
        iterations=iterations,
        final_energy=energy,
        residual_sup=res,
        tol=tol,
        converged=converged,
        positivity=pos.positive,
        hopf_ok=pos.hopf_ok,
        linf_bound=bound,
        linf_bound_ok=bound_ok,
        message=message,
        energy_history=history,
    )


def minimize(
    prob: EllipticProblem,
    u_init: GridFunction | None = None,
    opts: SolverOptions | None = None,
    label: str = "",
) -> SolveReport:
    """Minimise the discrete energy of ``prob`` from ``u_init``.

    Non-convergence is reported through ``SolveReport.converged``. A non-finite
    energy, initially or at a trial point of the line search, raises SolverError.
    """
    opts = opts or SolverOptions()
    grid = prob.grid
    if u_init is None:
        u_init = default_initial_guess(grid)
    if u_init.grid != grid:
        raise PreconditionError(f"initial guess lives on {u_init.grid}, problem on {grid}")
    tol = opts.resolved_tol(grid.n_cells)

    u = np.array(u_init.values, dtype=float)
    u[0] = u[-1] = 0.0
    with solver_span("minimize", {"family": prob.family.value, "n_cells": grid.n_cells}) as span:
        energy = energy_values(prob, u)
        if not np.isfinite(energy):
            raise SolverError(f"non-finite initial energy for {prob.family.value}")
        history = [energy]

        alpha_prev = opts.step0
        converged = False
        message = "max_iter reached"
        res = float("inf")
        iterations = 0
        for iterations in range(opts.max_iter + 1):
            r = residual_values(prob, u)[1:-1]
            res = float(np.max(np.abs(r))) if r.size else 0.0
            if res <= tol:
                converged = True
                message = "converged"
                break
            if iterations == opts.max_iter:
                break

            d = _direction(prob, u, r, opts.metric)
            slope = float(r @ d)
            if slope >= 0.0:
                d = -r / grid.h
                slope = float(r @ d)

            alpha = min(opts.step0, 2.0 * alpha_prev)
            slack = 1e-14 * (abs(energy) + 1.0)
            accepted = False
            trial = u
            trial_energy = energy
            for _ in range(opts.max_backtracks):
                trial = u.copy()
                trial[1:-1] += alpha * d
                trial_energy = energy_values(prob, trial)
                if not np.isfinite(trial_energy):
                    raise SolverError(
                        f"non-finite trial energy for {prob.family.value} "
                        f"at iteration {iterations}, step {alpha:.3e}"
                    )
                if trial_energy <= energy + opts.armijo_c * alpha * slope:
                    accepted = True
                elif trial_energy <= energy + slack:
                    # below energy resolution: require the residual to shrink instead
                    trial_res = np.max(np.abs(residual_values(prob, trial)[1:-1]))
                    accepted = bool(trial_res < res)
                if accepted:
                    break
                alpha *= opts.backtrack
            if not accepted:
                converged = res <= tol
                message = "line search stalled"
                logger.debug("line search stalled at iteration %d, residual %.3e", iterations, res)
                break

            u = trial
            energy = trial_energy
            alpha_prev = alpha
            history.append(energy)

        report = _finish(prob, u, iterations, energy, res, tol, converged, message, history)
        record_solve(span, report)
    log_solve_report(label or prob.family.value, report)
    return report


def solve_torsion(
    K: float,
    p: ExponentField,
    grid: Grid | None = None,
    opts: SolverOptions | None = None,
) -> SolveReport:
    """Solve -Delta_p w = K with zero boundary data."""
    if K <= 0.0:
        raise PreconditionError(f"torsion needs K > 0, got {K}")
    if grid is not None and grid != p.grid:
        raise PreconditionError("exponent field and grid disagree")
    prob = Torsion(p=p, K=K)
    return minimize(prob, default_initial_guess(p.grid), opts, label=f"torsion K={K}")


def uniqueness_probe(
    prob: EllipticProblem,
    inits: Sequence[GridFunction],
    opts: SolverOptions | None = None,
    threshold: float = UNIQUENESS_THRESHOLD,
) -> UniquenessReport:
    """Minimise from every initial guess and compare the solutions in the sup norm.

    Independent runs go through the worker pool of ``varexp.pipeline``.
    """
    if len(inits) < 2:
        raise PreconditionError("uniqueness_probe needs at least two initial guesses")
    jobs = [
        partial(minimize, prob, u0, opts, f"uniqueness init {i}") for i, u0 in enumerate(inits)
    ]
    reports = run_independent_sync(jobs)
    sols = [rep.solution.values for rep in reports]
    distances = [
        float(np.max(np.abs(sols[i] - sols[j])))
        for i in range(len(sols))
        for j in range(i + 1, len(sols))
    ]
    max_distance = max(distances)
    converged_all = all(rep.converged for rep in reports)
    if not converged_all:
        verdict = Verdict.INCONCLUSIVE
    elif max_distance <= threshold:
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.FAILS
    log_check(
        "uniqueness",
        verdict is not Verdict.FAILS,
        {"max_distance": max_distance, "verdict": verdict.value},
    )
    return UniquenessReport(
        distances=distances,
        max_distance=max_distance,
        threshold=threshold,
        converged_all=converged_all,
        verdict=verdict,
    )
