from __future__ import annotations

import dataclasses
from collections.abc import Callable

import numpy as np
import pytest

from varexp.elliptic import SourceF, solve_stationary
from varexp.errors import GridError, HypothesisError, PreconditionError
from varexp.expr import parse
from varexp.fde import (
    FdeConfig,
    average_forcing,
    euler_step,
    initial_floor,
    interpolants,
    jensen_check,
    run_fde,
    self_convergence_study,
    validate_fde_config,
)
from varexp.grid import CellField, GridFunction, build_uniform, sample_points

MakeConfig = Callable[..., FdeConfig]


def test_average_forcing_is_exact_for_linear_time_dependence() -> None:
    grid = build_uniform(0.0, 1.0, 8)
    dt = 0.25
    for quadrature in ("midpoint", "lumped"):
        averaged = average_forcing(parse("1 + t*x"), dt, 4, grid, quadrature=quadrature)
        assert len(averaged) == 4
        x = sample_points(grid, quadrature)
        for n, hn in enumerate(averaged, start=1):
            midpoint = (n - 0.5) * dt
            np.testing.assert_allclose(hn.values, 1.0 + midpoint * x, rtol=1e-14)
    assert isinstance(averaged[0], GridFunction)


def test_average_forcing_of_pure_time_dependence() -> None:
    grid = build_uniform(0.0, 1.0, 8)
    averaged = average_forcing(parse("t"), 0.25, 4, grid)
    assert all(isinstance(hn, CellField) for hn in averaged)
    for hn, expected in zip(averaged, (0.125, 0.375, 0.625, 0.875)):
        np.testing.assert_allclose(hn.values, expected, rtol=1e-14)


def test_average_forcing_uses_composite_midpoint_in_time() -> None:
    # 16-point composite midpoint rule on t^3 over [0, 1]: 1/4 - 1/2048
    grid = build_uniform(0.0, 1.0, 8)
    (centred,) = average_forcing(parse("x*t^3"), 1.0, 1, grid)
    np.testing.assert_allclose(centred.values, 0.24951171875 * grid.centers, rtol=1e-14)
    (nodal,) = average_forcing(parse("x*t^3"), 1.0, 1, grid, quadrature="lumped")
    assert nodal.values[-1] == pytest.approx(0.24951171875, rel=1e-14)


def test_average_forcing_quadrature_is_resolved() -> None:
    grid = build_uniform(0.0, 1.0, 16)
    h = parse("2 + sin(3*t)*cos(pi*x)")
    coarse = average_forcing(h, 2e-4, 5, grid, n_quad=16)
    fine = average_forcing(h, 2e-4, 5, grid, n_quad=256)
    for a, b in zip(coarse, fine):
        assert np.max(np.abs(a.values - b.values)) < 1e-10


def test_average_forcing_error_bound() -> None:
    # |error| <= (dt/16)^2 max|h_tt| / 24 with max|h_tt| = 9
    grid = build_uniform(0.0, 1.0, 16)
    dt = 0.1
    averaged = average_forcing(parse("2 + sin(3*t)*cos(pi*x)"), dt, 5, grid)
    for n, hn in enumerate(averaged):
        a, b = n * dt, (n + 1) * dt
        exact = 2.0 + (np.cos(3 * a) - np.cos(3 * b)) / (3 * dt) * np.cos(np.pi * grid.centers)
        assert np.max(np.abs(hn.values - exact)) <= (dt / 16) ** 2 * 9.0 / 24.0


def test_time_independent_forcing_is_repeated() -> None:
    grid = build_uniform(0.0, 1.0, 8)
    averaged = average_forcing(parse("1 + x"), 0.5, 3, grid)
    for hn in averaged:
        np.testing.assert_array_equal(hn.values, 1.0 + grid.centers)
    with pytest.raises(PreconditionError):
        average_forcing(parse("1"), 0.0, 3, grid)
    with pytest.raises(GridError):
        average_forcing(parse("1"), 0.5, 3, grid, quadrature="gauss")  # type: ignore[arg-type]


def test_jensen_inequality() -> None:
    grid = build_uniform(0.0, 1.0, 16)
    report = jensen_check(parse("1 + sin(5*t)*x"), grid, 1.0, 4)
    assert report.holds
    assert report.lhs <= report.rhs
    flat = jensen_check(parse("1 + x"), grid, 1.0, 4)
    assert flat.lhs == pytest.approx(flat.rhs, rel=1e-12)


def test_config_validation(make_config: MakeConfig) -> None:
    assert validate_fde_config(make_config()) == []
    messages = validate_fde_config(make_config(q=1.8))
    assert any(m.startswith("q <= min(N/2 + 1, p_-)") for m in messages)
    assert validate_fde_config(make_config(q=1.8, relaxed_q=True)) == []
    assert any(m.startswith("q in (1, p_-]") for m in validate_fde_config(make_config(q=2.5)))
    assert any("v0" in m for m in validate_fde_config(make_config(v0="x*(x-1)")))
    assert any("h0" in m for m in validate_fde_config(make_config(h0=parse("1 + t"))))
    assert any("T > 0" in m for m in validate_fde_config(make_config(T=-1.0)))


def test_run_rejects_violated_hypotheses(make_config: MakeConfig) -> None:
    with pytest.raises(HypothesisError) as info:
        run_fde(make_config(q=1.8))
    assert any("q <= min" in v for v in info.value.violations)
    with pytest.raises(HypothesisError):
        run_fde(make_config(h="x - 0.5"))


def test_initial_floor(make_config: MakeConfig) -> None:
    cfg = make_config()
    averaged = average_forcing(cfg.h, cfg.dt, cfg.n_steps, cfg.grid)
    np.testing.assert_array_equal(initial_floor(cfg, averaged).values, averaged[0].values)
    fixed = dataclasses.replace(cfg, h0=parse("0.5"))
    np.testing.assert_allclose(initial_floor(fixed, averaged).values, 0.5)


def test_trajectory_is_bracketed_and_positive(make_config: MakeConfig) -> None:
    traj = run_fde(make_config())
    assert len(traj.steps) == 5
    assert all(traj.bracket_ok)
    summary = traj.summary()
    assert summary.n_steps == 4
    assert all(summary.positive)
    assert all(summary.converged)
    assert summary.jensen.holds
    assert len(summary.increments) == 4
    np.testing.assert_allclose(summary.times, [0.0, 0.05, 0.1, 0.15, 0.2])
    assert traj.sub.parameter <= 1.0
    assert traj.sup.parameter >= 1.0


def test_long_run_stays_bracketed(make_config: MakeConfig) -> None:
    traj = run_fde(make_config(T=0.32, n_steps=32, bracket_tol=1e-10))
    assert len(traj.bracket_ok) == 33
    assert all(traj.bracket_ok)
    for v in traj.steps:
        assert np.all(traj.sub.solution.values - 1e-10 <= v.values)
        assert np.all(v.values <= traj.sup.solution.values + 1e-10)


def test_euler_step_is_deterministic(make_config: MakeConfig) -> None:
    cfg = make_config()
    averaged = average_forcing(cfg.h, cfg.dt, cfg.n_steps, cfg.grid)
    first = euler_step(cfg.v0, averaged[0], cfg)
    second = euler_step(cfg.v0, averaged[0], cfg)
    assert np.array_equal(first.solution.values, second.solution.values)
    assert first.iterations == second.iterations
    assert first.final_energy == second.final_energy


def test_euler_step_without_forcing_decays(make_config: MakeConfig) -> None:
    cfg = make_config(f=SourceF.zero(), waive_f2=True)
    v_prev = cfg.v0
    zero = CellField.constant(0.0, cfg.grid)
    for _ in range(3):
        report = euler_step(v_prev, zero, cfg)
        assert report.converged
        assert np.all(report.solution.values <= v_prev.values + 1e-10)
        assert np.max(report.solution.values) < np.max(v_prev.values)
        v_prev = report.solution


def test_stationary_solution_is_a_fixed_point(make_config: MakeConfig) -> None:
    base = make_config(h="1")
    ones = CellField.constant(1.0, base.grid)
    stationary = solve_stationary(base.p, ones, base.q, base.f, opts=base.solver)
    assert stationary.converged
    traj = run_fde(dataclasses.replace(base, v0=stationary.solution))
    for v in traj.steps:
        assert np.max(np.abs(v.values - stationary.solution.values)) <= 1e-10


def test_interpolants(make_config: MakeConfig) -> None:
    traj = run_fde(make_config())
    q = traj.config.q
    powers = traj.powers
    at_node = interpolants(traj, 0.1)
    np.testing.assert_array_equal(at_node.v_tilde.values, powers[2])
    assert at_node.v_step is traj.steps[2]
    middle = interpolants(traj, 0.125)
    np.testing.assert_allclose(middle.v_tilde.values, 0.5 * (powers[2] + powers[3]))
    assert middle.v_step is traj.steps[3]
    np.testing.assert_allclose(interpolants(traj, 0.0).v_tilde.values, traj.steps[0].values**q)
    with pytest.raises(PreconditionError):
        interpolants(traj, 0.3)


def test_self_convergence_study(make_config: MakeConfig) -> None:
    report = self_convergence_study(make_config(), levels=(2, 4, 8))
    assert report.n_steps == [2, 4, 8]
    assert len(report.differences) == 2
    assert len(report.ratios) == 1
    with pytest.raises(PreconditionError):
        self_convergence_study(make_config(), levels=(4,))
