from __future__ import annotations

import numpy as np
import pytest

from varexp.errors import GridError
from varexp.expr import parse
from varexp.grid import CellField, GridFunction, build_uniform, gradient, nodes_to_cells
from varexp.vxspace import (
    ExponentField,
    check_norm_modular_bounds,
    co_vanishing_check,
    conjugate,
    holder_check,
    holder_constant,
    luxemburg_norm,
    modular,
    sobolev_norm,
)


def _random_exponent(rng: np.random.Generator, n: int) -> ExponentField:
    grid = build_uniform(0.0, 1.0, n)
    return ExponentField(grid, rng.uniform(1.2, 4.0, n), rng.uniform(1.2, 4.0, n + 1))


def test_exponent_bounds_and_sampling() -> None:
    grid = build_uniform(0.0, 1.0, 10)
    p = ExponentField.from_expression(parse("2 + 0.5*x"), grid)
    # bounds come from the cell centres 0.05, ..., 0.95
    assert p.p_minus == pytest.approx(2.025)
    assert p.p_plus == pytest.approx(2.475)
    assert p.p_nodes.min() == pytest.approx(2.0)
    np.testing.assert_array_equal(p.at_samples("midpoint"), p.p_cells)
    np.testing.assert_array_equal(p.at_samples("lumped"), p.p_nodes)
    np.testing.assert_allclose(p.at([0.2]), [2.1])
    assert ExponentField.constant(3.0, grid).is_constant


def test_exponent_must_exceed_one() -> None:
    grid = build_uniform(0.0, 1.0, 10)
    with pytest.raises(GridError):
        ExponentField.from_expression(parse("1"), grid)
    q = ExponentField.from_expression(parse("1"), grid, allow_one=True)
    assert q.p_minus == 1.0
    with pytest.raises(GridError):
        ExponentField.from_expression(parse("0.9 + x"), grid, allow_one=True)


def test_luxemburg_constant_exponent_is_lp_norm() -> None:
    grid = build_uniform(0.0, 1.0, 32)
    p = ExponentField.constant(2.0, grid)
    assert luxemburg_norm(CellField.constant(3.0, grid), p) == pytest.approx(3.0, rel=1e-10)
    assert luxemburg_norm(CellField.constant(0.0, grid), p) == 0.0


def test_luxemburg_self_consistency() -> None:
    rng = np.random.default_rng(0)
    for _ in range(500):
        p = _random_exponent(rng, 32)
        scale = 10.0 ** rng.uniform(-3, 3)
        u = CellField(p.grid, scale * rng.standard_normal(32))
        norm = luxemburg_norm(u, p)
        assert modular(CellField(p.grid, u.values / norm), p) == pytest.approx(1.0, abs=1e-10)


def test_norm_modular_chains_cover_both_branches() -> None:
    rng = np.random.default_rng(1)
    branches = set()
    for i in range(500):
        p = _random_exponent(rng, 24)
        scale = 10.0 ** (2.0 if i % 2 else -2.0) * rng.uniform(0.5, 2.0)
        u = CellField(p.grid, scale * rng.uniform(-1.0, 1.0, 24))
        report = check_norm_modular_bounds(u, p)
        assert report.holds, report
        branches.add(report.branch)
    assert branches == {"norm>=1", "norm<1"}


def test_holder_inequality() -> None:
    rng = np.random.default_rng(2)
    for _ in range(100):
        p = _random_exponent(rng, 40)
        f = CellField(p.grid, rng.standard_normal(40))
        g = CellField(p.grid, rng.standard_normal(40))
        assert holder_check(f, g, p).holds


def test_conjugate_and_holder_constant() -> None:
    grid = build_uniform(0.0, 1.0, 8)
    p = ExponentField.constant(2.0, grid)
    np.testing.assert_allclose(conjugate(p).p_cells, 2.0)
    assert holder_constant(p) == pytest.approx(1.0)
    assert holder_constant(ExponentField.constant(3.0, grid)) == pytest.approx(1 / 3 + 2 / 3)


def test_holder_constant_never_exceeds_two() -> None:
    rng = np.random.default_rng(9)
    for _ in range(200):
        p = _random_exponent(rng, 24)
        constant = holder_constant(p)
        assert 1.0 <= constant <= 2.0
        assert constant == pytest.approx(1.0 + 1.0 / p.p_minus - 1.0 / p.p_plus, rel=1e-12)
    near_one = ExponentField(
        build_uniform(0.0, 1.0, 4), np.array([1.001, 50.0, 50.0, 50.0]), np.full(5, 1.001)
    )
    assert 1.9 < holder_constant(near_one) <= 2.0


def test_co_vanishing_is_monotone() -> None:
    grid = build_uniform(0.0, 1.0, 64)
    p = ExponentField.from_expression(parse("1.5 + x"), grid)
    u = CellField.from_expression(parse("5*sin(pi*x)"), grid)
    report = co_vanishing_check(u, p, k=12)
    assert report.monotone
    assert len(report.norms) == 13
    assert report.modulars[-1] < 1e-3 * report.modulars[0]


def test_sobolev_norm_with_p_two() -> None:
    grid = build_uniform(0.0, 1.0, 128)
    p = ExponentField.constant(2.0, grid)
    u = GridFunction.from_expression(parse("x*(1-x)"), grid)
    expected = np.sqrt(np.sum(nodes_to_cells(u).values ** 2) * grid.h) + np.sqrt(
        np.sum(gradient(u).values ** 2) * grid.h
    )
    assert sobolev_norm(u, p) == pytest.approx(expected, rel=1e-10)


def test_grid_mismatch_rejected() -> None:
    p = ExponentField.constant(2.0, build_uniform(0.0, 1.0, 8))
    with pytest.raises(GridError):
        modular(CellField.constant(1.0, build_uniform(0.0, 1.0, 16)), p)
