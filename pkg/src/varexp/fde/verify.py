"""Verification harness for Euler trajectories: contraction, comparison and energy bounds."""

from __future__ import annotations

import numpy as np

from varexp.errors import PreconditionError
from varexp.fde.scheme import FdeTrajectory, interpolants
from varexp.grid import GridFunction, collocate, l2_norm_nodal, sample_weights
from varexp.models import (
    ComparisonReport,
    ContractionReport,
    EnergyEstimateReport,
    InterpolantReport,
    Verdict,
)
from varexp.telemetry.logger import log_check

CONTRACTION_TOL = 1e-6
COMPARISON_TOL = 1e-8
ORDER_TOL = 1e-12
ENERGY_SLACK = 1e-8


def _require_compatible(a: FdeTrajectory, b: FdeTrajectory) -> None:
    ca, cb = a.config, b.config
    problems = []
    if ca.grid != cb.grid:
        problems.append("grid")
    if len(a.steps) != len(b.steps) or not np.isclose(ca.dt, cb.dt, rtol=1e-14, atol=0.0):
        problems.append("time steps")
    if ca.q != cb.q:
        problems.append("q")
    if ca.quadrature != cb.quadrature:
        problems.append("quadrature")
    if not np.array_equal(ca.p.p_cells, cb.p.p_cells):
        problems.append("p")
    if ca.f.kind != cb.f.kind or ca.f.gamma != cb.f.gamma or not np.array_equal(ca.f.c, cb.f.c):
        problems.append("f")
    if problems:
        raise PreconditionError(f"trajectories are not comparable: {', '.join(problems)} differ")


def _sample_powers(traj: FdeTrajectory) -> list[np.ndarray]:
    """v_n^q at the sample points of the scheme's quadrature."""
    cfg = traj.config
    return [np.maximum(collocate(v.values, cfg.quadrature), 0.0) ** cfg.q for v in traj.steps]


def _sample_norm(traj: FdeTrajectory, values: np.ndarray) -> float:
    cfg = traj.config
    return float(np.sqrt(np.sum(sample_weights(cfg.grid, cfg.quadrature) * values**2)))


def contraction_check(
    traj1: FdeTrajectory,
    traj2: FdeTrajectory,
    tol: float = CONTRACTION_TOL,
) -> ContractionReport:
    """Step-time L^2 contraction between two trajectories.

    ||(v1_n^q - v2_n^q)^+|| <= ||(v1_0^q - v2_0^q)^+|| + sum_{k<=n} dt ||(h1^k - h2^k)^+||,

    every norm taken with the quadrature of the scheme.
    """
    _require_compatible(traj1, traj2)
    dt = traj1.dt
    p1, p2 = _sample_powers(traj1), _sample_powers(traj2)
    lhs: list[float] = []
    rhs: list[float] = []
    forcing = _sample_norm(traj1, np.maximum(p1[0] - p2[0], 0.0))
    for n in range(len(p1)):
        if n > 0:
            gap = traj1.h_avg[n - 1].values - traj2.h_avg[n - 1].values
            forcing += dt * _sample_norm(traj1, np.maximum(gap, 0.0))
        lhs.append(_sample_norm(traj1, np.maximum(p1[n] - p2[n], 0.0)))
        rhs.append(forcing)
    scale = 1.0 + max(_sample_norm(traj1, v) for v in (*p1, *p2))
    max_violation = max(max(0.0, a - b) for a, b in zip(lhs, rhs))
    holds = max_violation <= tol * scale
    log_check("contraction", holds, {"max_violation": max_violation, "scale": scale})
    return ContractionReport(
        times=traj1.times.tolist(),
        lhs=lhs,
        rhs=rhs,
        max_violation=max_violation,
        scale=scale,
        tol=tol,
        holds=holds,
    )


def comparison_check(
    traj1: FdeTrajectory,
    traj2: FdeTrajectory,
    tol: float = COMPARISON_TOL,
) -> ComparisonReport:
    """v1_n <= v2_n + tol at every node and step, given ordered data.

    Unordered initial data or forcings make the verdict inconclusive.
    """
    _require_compatible(traj1, traj2)
    ordered = bool(np.all(traj1.steps[0].values <= traj2.steps[0].values + ORDER_TOL))
    ordered = ordered and all(
        bool(np.all(a.values <= b.values + ORDER_TOL))
        for a, b in zip(traj1.h_avg, traj2.h_avg)
    )
    max_excess = max(
        float(np.max(a.values - b.values)) for a, b in zip(traj1.steps, traj2.steps)
    )
    if not ordered:
        verdict = Verdict.INCONCLUSIVE
    elif max_excess <= tol:
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.FAILS
    log_check("comparison", verdict is not Verdict.FAILS, {"max_excess": max_excess})
    return ComparisonReport(preconditions_ok=ordered, max_excess=max_excess, verdict=verdict)


def _gradient_modular(traj: FdeTrajectory, v: GridFunction) -> float:
    grid = traj.config.grid
    p = traj.config.p.p_cells
    d = np.diff(v.values) / grid.h
    return float(np.sum(grid.h * np.abs(d) ** p / p))


def energy_estimate(traj: FdeTrajectory, slack: float = ENERGY_SLACK) -> EnergyEstimateReport:
    """Discrete energy estimate of the scheme, checked after every step.

    Testing step n with v_n - v_{n-1} gives, with e_n = (v_n^q - v_{n-1}^q)/dt
    and c_n = q v_n^{q-1} (v_n - v_{n-1})/dt,

        sum dt (<e, c> - |c|^2 / 2) + q G(v_n) - q G(v_0)
            <= sum dt (||h^k||^2 + ||f(v_k) / v_k^{q-1}||^2),

    where G(v) = int |v'|^p / p. Pointwise quantities are read at the sample
    points of the quadrature the step equations are assembled with. The first
    sum approximates half the summed increments ``increment_sum``, which is
    reported alongside.
    """
    cfg = traj.config
    w = sample_weights(cfg.grid, cfg.quadrature)
    q, dt = cfg.q, traj.dt
    g0 = _gradient_modular(traj, traj.steps[0])
    increment_sum: list[float] = []
    lhs: list[float] = []
    rhs: list[float] = []
    inc = tested = bound = 0.0
    for n in range(1, len(traj.steps)):
        a = collocate(traj.steps[n - 1].values, cfg.quadrature)
        b = collocate(traj.steps[n].values, cfg.quadrature)
        positive = b > 0.0
        e = (np.maximum(b, 0.0) ** q - np.maximum(a, 0.0) ** q) / dt
        safe = np.where(positive, b, 1.0)
        c = np.where(positive, q * safe ** (q - 1.0) * (b - a) / dt, 0.0)
        ratio = np.where(positive, cfg.f.value(b) / safe ** (q - 1.0), 0.0)
        forcing = np.where(positive, traj.h_avg[n - 1].values, 0.0)
        inc += dt * float(np.sum(w * e**2))
        tested += dt * float(np.sum(w * (e * c - 0.5 * c**2)))
        bound += dt * float(np.sum(w * (forcing**2 + ratio**2)))
        increment_sum.append(inc)
        lhs.append(tested + q * _gradient_modular(traj, traj.steps[n]) - q * g0)
        rhs.append(bound)
    holds = all(a <= b + slack * (1.0 + b) for a, b in zip(lhs, rhs))
    log_check("energy_estimate", holds, {"steps": len(lhs)})
    return EnergyEstimateReport(increment_sum=increment_sum, lhs=lhs, rhs=rhs, holds=holds)


def interpolant_distance(traj: FdeTrajectory, samples_per_step: int = 8) -> InterpolantReport:
    """Sampled sup_t ||v~ - v_step^q||^2 against max_n ||v_n^q - v_{n-1}^q||^2."""
    grid = traj.config.grid
    q = traj.config.q
    times = traj.times
    sup_distance = 0.0
    for n in range(1, len(times)):
        for t in np.linspace(times[n - 1], times[n], samples_per_step + 2)[1:]:
            step, tilde = interpolants(traj, float(t))
            diff = tilde.values - np.maximum(step.values, 0.0) ** q
            sup_distance = max(sup_distance, l2_norm_nodal(GridFunction(grid, diff)) ** 2)
    bound = max((inc**2 for inc in traj.increments()), default=0.0)
    holds = sup_distance <= bound * (1.0 + 1e-12)
    return InterpolantReport(sup_distance=sup_distance, bound=bound, holds=holds)
