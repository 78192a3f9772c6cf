from __future__ import annotations

import numpy as np
import pytest

from varexp.elliptic import (
    BracketFunction,
    SourceF,
    build_subsolution,
    build_supersolution,
    solve_stationary,
)
from varexp.elliptic.barriers import K_GRID, MU_GRID
from varexp.errors import BracketError, PreconditionError
from varexp.expr import parse
from varexp.grid import CellField, GridFunction, build_uniform
from varexp.vxspace import ExponentField


Setting = tuple[ExponentField, CellField, SourceF, GridFunction]


@pytest.fixture
def setting() -> Setting:
    grid = build_uniform(0.0, 1.0, 48)
    p = ExponentField.from_expression(parse("2 + 0.25*x"), grid)
    h0 = CellField.constant(1.0, grid)
    f = SourceF.power(1.0, 1.25)
    v0 = GridFunction.from_expression(parse("sin(pi*x)"), grid)
    return p, h0, f, v0


def test_parameter_grids() -> None:
    assert MU_GRID[0] == 1.0 and MU_GRID[-1] == 2.0**-20
    assert K_GRID[0] == 1.0 and K_GRID[-1] == 2.0**20


def test_subsolution_lies_below(setting: Setting) -> None:
    p, h0, f, v0 = setting
    sub = build_subsolution(p, h0, 1.5, f, v0)
    assert isinstance(sub, BracketFunction)
    assert sub.kind == "sub"
    assert sub.parameter in MU_GRID
    assert np.all(sub.solution.values <= v0.values + 1e-12)
    assert np.all(sub.solution.interior > 0.0)


def test_supersolution_lies_above(setting: Setting) -> None:
    p, _, f, v0 = setting
    sup = build_supersolution(p, 1.0, 1.5, f, v0)
    assert sup.kind == "sup"
    assert sup.parameter in K_GRID
    assert np.all(sup.solution.values >= v0.values - 1e-12)
    assert sup.report.converged


def test_bracket_failure_is_reported(setting: Setting) -> None:
    p, h0, f, v0 = setting
    tiny = v0.with_values(1e-6 * v0.values)
    with pytest.raises(BracketError):
        build_subsolution(p, h0, 1.5, f, tiny, mu_grid=(1.0,))
    with pytest.raises(BracketError):
        build_supersolution(p, 1.0, 1.5, f, v0.with_values(1e6 * v0.values), k_grid=(1.0,))


def test_barrier_preconditions(setting: Setting) -> None:
    p, h0, f, v0 = setting
    with pytest.raises(PreconditionError):
        build_subsolution(p, h0, 1.5, f, v0, mu_grid=())
    with pytest.raises(PreconditionError):
        build_subsolution(p, h0, 1.5, f, v0, mu_grid=(0.5, -1.0))
    with pytest.raises(PreconditionError):
        build_supersolution(p, -1.0, 1.5, f, v0)
    with pytest.raises(PreconditionError):
        build_supersolution(p, 1.0, 1.5, f, v0, k_grid=(0.0,))


def test_stationary_solution_is_positive(setting: Setting) -> None:
    p, h0, f, _ = setting
    report = solve_stationary(p, h0, 1.5, f)
    assert report.converged
    assert report.positivity and report.hopf_ok


def test_subsolution_decreases_to_zero_with_mu(setting: Setting) -> None:
    p, h0, f, v0 = setting
    high = v0.with_values(10.0 * v0.values)
    barriers = [build_subsolution(p, h0, 1.5, f, high, mu_grid=(mu,)) for mu in (1.0, 0.1, 0.01)]
    for upper, lower in zip(barriers, barriers[1:]):
        assert np.all(lower.solution.values <= upper.solution.values + 1e-9)
    peaks = [float(np.max(b.solution.values)) for b in barriers]
    assert peaks[0] > peaks[1] > peaks[2]
    assert peaks[2] <= 0.05 * peaks[0]


def test_supersolution_increases_with_K(setting: Setting) -> None:
    p, _, f, v0 = setting
    low = v0.with_values(1e-2 * v0.values)
    barriers = [build_supersolution(p, 1.0, 1.5, f, low, k_grid=(K,)) for K in (1.0, 4.0, 16.0)]
    for lower, upper in zip(barriers, barriers[1:]):
        assert np.all(lower.solution.values <= upper.solution.values + 1e-9)
        assert np.max(upper.solution.values) > np.max(lower.solution.values)


def test_lumped_barriers_follow_the_coefficient_layout(setting: Setting) -> None:
    p, _, f, v0 = setting
    grid = v0.grid
    h0 = GridFunction(grid, np.ones(grid.n_nodes))
    sub = build_subsolution(p, h0, 1.5, f, v0)
    assert np.all(sub.solution.values <= v0.values + 1e-12)
    sup = build_supersolution(p, 1.0, 1.5, f, v0, quadrature="lumped")
    assert np.all(sup.solution.values >= v0.values - 1e-12)
