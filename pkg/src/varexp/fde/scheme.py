"""Implicit Euler scheme for the fast diffusion problem.

Step n solves v^{2q-1} - dt Delta_p v = (dt h^n + v_{n-1}^q) v^{q-1} + dt f(x, v),
which is the Euler-step elliptic family with lam = dt and h0 = dt h^n + v_{n-1}^q.
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import partial
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from varexp.elliptic.barriers import (
    K_GRID,
    MU_GRID,
    BracketFunction,
    build_subsolution,
    build_supersolution,
)
from varexp.elliptic.problems import FdeStep, SourceF, source_violations
from varexp.elliptic.solver import minimize
from varexp.errors import HypothesisError, PreconditionError, SolverError
from varexp.expr import Expression, sample
from varexp.grid import (
    Coefficient,
    Grid,
    GridFunction,
    QUADRATURES,
    Quadrature,
    check_quadrature,
    coefficient,
    coefficient_from_expression,
    collocate,
    l2_norm,
    l2_norm_nodal,
    sample_points,
)
from varexp.models import (
    JensenReport,
    SelfConvergenceReport,
    SolveReport,
    SolverOptions,
    TrajectorySummary,
)
from varexp.pipeline import run_independent_sync
from varexp.telemetry.logger import log_check
from varexp.telemetry.otel import solver_span
from varexp.vxspace import ExponentField

logger = logging.getLogger("varexp")

FloatArray = npt.NDArray[np.float64]

QUAD_POINTS = 16
BRACKET_TOL = 1e-10
# Largest q allowed in one space dimension without the relaxed source condition.
Q_CRITICAL = 1.5


@dataclass(frozen=True, eq=False)
class FdeConfig:
    """Data of one fast diffusion run on a fixed grid."""

    T: float
    n_steps: int
    q: float
    p: ExponentField
    f: SourceF
    h: Expression
    v0: GridFunction
    h0: Expression | None = None
    relaxed_q: bool = False
    waive_f2: bool = False
    solver: SolverOptions = field(default_factory=SolverOptions)
    mu_grid: tuple[float, ...] = MU_GRID
    k_grid: tuple[float, ...] = K_GRID
    bracket_tol: float = BRACKET_TOL
    quad_points: int = QUAD_POINTS
    quadrature: Quadrature = "midpoint"

    @property
    def grid(self) -> Grid:
        return self.p.grid

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    def with_steps(self, n_steps: int) -> FdeConfig:
        return dataclasses.replace(self, n_steps=n_steps)


def validate_fde_config(cfg: FdeConfig) -> list[str]:
    """Every violated requirement of ``cfg``; empty when the run may start."""
    out: list[str] = []
    if cfg.T <= 0.0:
        out.append(f"T > 0 violated: T={cfg.T}")
    if cfg.n_steps < 1:
        out.append(f"n_steps >= 1 violated: n_steps={cfg.n_steps}")
    p_minus = cfg.p.p_minus
    if not 1.0 < cfg.q <= p_minus:
        out.append(f"q in (1, p_-] violated: q={cfg.q}, p_-={p_minus}")
    if not cfg.relaxed_q and cfg.q > Q_CRITICAL:
        out.append(f"q <= min(N/2 + 1, p_-) violated: q={cfg.q} > {Q_CRITICAL}")
    out.extend(source_violations(cfg.f, cfg.q, waive_f2=cfg.waive_f2))
    if cfg.v0.grid != cfg.grid:
        out.append("v0 lives on a different grid")
    elif not cfg.v0.dirichlet_zero or np.any(cfg.v0.interior <= 0.0):
        out.append("v0 must have zero trace and be positive on interior nodes")
    if not cfg.h.variables <= {"x", "t"}:
        out.append("h may only depend on x and t")
    if cfg.h0 is not None and not cfg.h0.variables <= {"x"}:
        out.append("h0 may only depend on x")
    if cfg.quadrature not in QUADRATURES:
        out.append(f"quadrature must be one of {QUADRATURES}, got {cfg.quadrature!r}")
    if cfg.quad_points < 1:
        out.append(f"quad_points >= 1 violated: quad_points={cfg.quad_points}")
    return out


def _time_samples(dt: float, n_steps: int, n_quad: int) -> tuple[FloatArray, float]:
    """Composite midpoint rule in t: times (n_steps, n_quad) and the common weight dt/n_quad."""
    if n_quad < 1:
        raise PreconditionError(f"need at least one quadrature point, got {n_quad}")
    offsets = (np.arange(n_quad) + 0.5) * dt / n_quad
    return dt * np.arange(n_steps)[:, None] + offsets[None, :], dt / n_quad


def average_forcing(
    h: Expression,
    dt: float,
    n_steps: int,
    grid: Grid,
    n_quad: int = QUAD_POINTS,
    quadrature: Quadrature = "midpoint",
) -> list[Coefficient]:
    """h^n(x) = (1/dt) int_{t_{n-1}}^{t_n} h(s, x) ds, n = 1..n_steps.

    Sampled where ``quadrature`` reads coefficients: CellFields at the cell
    centres by default, nodal GridFunctions for the lumped variant.
    """
    if dt <= 0.0 or n_steps < 1:
        raise PreconditionError(f"need dt > 0 and n_steps >= 1, got dt={dt}, n_steps={n_steps}")
    check_quadrature(quadrature)
    x = sample_points(grid, quadrature)
    if "t" not in h.variables:
        values = sample(h, x)
        return [coefficient(grid, values, quadrature) for _ in range(n_steps)]
    times, weight = _time_samples(dt, n_steps, n_quad)
    out: list[Coefficient] = []
    for row in times:
        acc = np.zeros_like(x)
        for t in row:
            acc += sample(h, x, float(t))
        out.append(coefficient(grid, weight * acc / dt, quadrature))
    return out


def jensen_check(
    h: Expression,
    grid: Grid,
    T: float,
    n_steps: int,
    n_quad: int = QUAD_POINTS,
    quadrature: Quadrature = "midpoint",
) -> JensenReport:
    """sum dt ||h^n||^2 <= ||h||^2 over (0, T) x Omega, both with the same quadratures."""
    dt = T / n_steps
    averaged = average_forcing(h, dt, n_steps, grid, n_quad, quadrature)
    lhs = float(sum(dt * l2_norm(hn) ** 2 for hn in averaged))
    x = sample_points(grid, quadrature)
    if "t" not in h.variables:
        rhs = T * l2_norm(coefficient(grid, sample(h, x), quadrature)) ** 2
    else:
        times, weight = _time_samples(dt, n_steps, n_quad)
        rhs = 0.0
        for t in times.ravel():
            rhs += weight * l2_norm(coefficient(grid, sample(h, x, float(t)), quadrature)) ** 2
    holds = lhs <= rhs * (1.0 + 1e-12) + 1e-14
    log_check("jensen", holds, {"lhs": lhs, "rhs": rhs})
    return JensenReport(lhs=lhs, rhs=rhs, holds=holds)


def euler_step(
    v_prev: GridFunction,
    h_n: Coefficient,
    cfg: FdeConfig,
    label: str = "euler step",
) -> SolveReport:
    """One implicit Euler step, warm-started from ``v_prev``.

    h0 = dt h^n + v_{n-1}^q is formed from v_{n-1} collocated like the
    potentials, so a stationary solution is reproduced exactly.
    """
    prev = np.maximum(collocate(v_prev.values, cfg.quadrature), 0.0)
    prob = FdeStep(
        p=cfg.p,
        lam=cfg.dt,
        q=cfg.q,
        h0=h_n.with_values(cfg.dt * h_n.values + prev**cfg.q),
        f=cfg.f,
        quadrature=cfg.quadrature,
    )
    return minimize(prob, v_prev, cfg.solver, label=label)


@dataclass(eq=False)
class FdeTrajectory:
    """Accepted iterates v_0..v_n with their forcings, barriers and step reports."""

    config: FdeConfig
    steps: list[GridFunction]
    h_avg: list[Coefficient]
    sub: BracketFunction
    sup: BracketFunction
    reports: list[SolveReport] = field(default_factory=list)
    bracket_ok: list[bool] = field(default_factory=list)
    jensen: JensenReport | None = None

    @property
    def dt(self) -> float:
        return self.config.dt

    @property
    def times(self) -> FloatArray:
        return self.dt * np.arange(len(self.steps))

    @property
    def powers(self) -> list[FloatArray]:
        return [np.maximum(v.values, 0.0) ** self.config.q for v in self.steps]

    def increments(self) -> list[float]:
        pw = self.powers
        grid = self.config.grid
        return [l2_norm_nodal(GridFunction(grid, b - a)) for a, b in zip(pw[:-1], pw[1:])]

    def summary(self) -> TrajectorySummary:
        return TrajectorySummary(
            T=self.config.T,
            n_steps=len(self.steps) - 1,
            dt=self.dt,
            q=self.config.q,
            times=self.times.tolist(),
            sub_parameter=self.sub.parameter,
            sup_parameter=self.sup.parameter,
            bracket_ok=self.bracket_ok,
            positive=[bool(np.all(v.interior > 0.0)) for v in self.steps],
            converged=[rep.converged for rep in self.reports],
            iterations=[rep.iterations for rep in self.reports],
            increments=self.increments(),
            jensen=self.jensen or JensenReport(lhs=0.0, rhs=0.0, holds=True),
        )


def initial_floor(cfg: FdeConfig, averaged: Sequence[Coefficient]) -> Coefficient:
    """h0: the configured expression, or the pointwise minimum of the averaged forcings."""
    grid = cfg.grid
    if cfg.h0 is not None:
        return coefficient_from_expression(cfg.h0, grid, cfg.quadrature)
    return averaged[0].with_values(np.min(np.stack([hn.values for hn in averaged]), axis=0))


def run_fde(cfg: FdeConfig) -> FdeTrajectory:
    """Bracket v0, then take ``cfg.n_steps`` Euler steps.

    A step that fails to converge raises SolverError carrying the partial
    trajectory.
    """
    violations = validate_fde_config(cfg)
    if violations:
        raise HypothesisError(violations)
    grid = cfg.grid
    averaged = average_forcing(cfg.h, cfg.dt, cfg.n_steps, grid, cfg.quad_points, cfg.quadrature)
    h0 = initial_floor(cfg, averaged)
    if np.any(h0.values < 0.0) or not np.any(h0.values > 0.0):
        raise HypothesisError(["0 <= h0, h0 not identically 0 violated"])
    if any(np.any(hn.values < h0.values - 1e-12) for hn in averaged):
        raise HypothesisError(["h >= h0 violated"])
    h_sup = float(max(np.max(hn.values) for hn in averaged))

    with solver_span("run_fde", {"n_steps": cfg.n_steps, "q": cfg.q}):
        sub = build_subsolution(cfg.p, h0, cfg.q, cfg.f, cfg.v0, cfg.mu_grid, cfg.solver)
        sup = build_supersolution(
            cfg.p, h_sup, cfg.q, cfg.f, cfg.v0, cfg.k_grid, cfg.solver, quadrature=cfg.quadrature
        )
        traj = FdeTrajectory(
            config=cfg,
            steps=[cfg.v0],
            h_avg=averaged,
            sub=sub,
            sup=sup,
            bracket_ok=[_bracketed(cfg.v0, sub, sup, cfg.bracket_tol)],
            jensen=jensen_check(
                cfg.h, grid, cfg.T, cfg.n_steps, cfg.quad_points, cfg.quadrature
            ),
        )
        for n in range(1, cfg.n_steps + 1):
            report = euler_step(traj.steps[-1], averaged[n - 1], cfg, label=f"euler step {n}")
            traj.reports.append(report)
            if not report.converged:
                raise SolverError(
                    f"Euler step {n} did not converge: {report.message}",
                    report=report,
                    partial=traj,
                )
            traj.steps.append(report.solution)
            ok = _bracketed(report.solution, sub, sup, cfg.bracket_tol)
            traj.bracket_ok.append(ok)
            if not ok:
                logger.warning("step %d leaves the bracket [sub, sup]", n)
    log_check("bracketing", all(traj.bracket_ok), {"n_steps": cfg.n_steps})
    return traj


def _bracketed(v: GridFunction, sub: BracketFunction, sup: BracketFunction, tol: float) -> bool:
    return bool(
        np.all(sub.solution.values - tol <= v.values)
        and np.all(v.values <= sup.solution.values + tol)
    )


class Interpolants(NamedTuple):
    v_step: GridFunction
    v_tilde: GridFunction


def interpolants(traj: FdeTrajectory, t: float) -> Interpolants:
    """Piecewise-constant v and the linear interpolant of v^q at time t.

    ``v_tilde`` holds the interpolated q-th powers, not their q-th root.
    """
    times = traj.times
    T = float(times[-1])
    if not -1e-12 * max(T, 1.0) <= t <= T * (1.0 + 1e-12):
        raise PreconditionError(f"t must lie in [0, {T}], got {t}")
    grid = traj.config.grid
    powers = traj.powers
    snap = np.flatnonzero(np.isclose(times, t, rtol=1e-12, atol=1e-14 * max(T, 1.0)))
    if snap.size:
        n = int(snap[0])
        return Interpolants(traj.steps[n], GridFunction(grid, powers[n]))
    n = int(np.searchsorted(times, t, side="left"))
    theta = (t - times[n - 1]) / traj.dt
    tilde = theta * (powers[n] - powers[n - 1]) + powers[n - 1]
    return Interpolants(traj.steps[n], GridFunction(grid, tilde))


def self_convergence_study(
    cfg: FdeConfig,
    levels: Sequence[int] = (8, 16, 32),
) -> SelfConvergenceReport:
    """Runs ``cfg`` at each step count and compares the final states in L^2.

    Ratios of successive differences are reported only; no rate is asserted.
    """
    if len(levels) < 2:
        raise PreconditionError("self_convergence_study needs at least two levels")
    runs = run_independent_sync([partial(run_fde, cfg.with_steps(n)) for n in levels])
    grid = cfg.grid
    finals = [run.steps[-1].values for run in runs]
    differences = [
        l2_norm_nodal(GridFunction(grid, b - a)) for a, b in zip(finals[:-1], finals[1:])
    ]
    ratios = [
        a / b if b > 0.0 else float("inf") for a, b in zip(differences[:-1], differences[1:])
    ]
    return SelfConvergenceReport(n_steps=list(levels), differences=differences, ratios=ratios)
