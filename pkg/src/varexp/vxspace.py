"""Variable-exponent Lebesgue machinery: modulars, Luxemburg norms and classical inequalities."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from varexp.errors import BracketError, GridError
from varexp.expr import Expression, sample
from varexp.grid import (
    CellField,
    Grid,
    GridFunction,
    Quadrature,
    gradient,
    integrate,
    nodes_to_cells,
    require_same_grid,
)
from varexp.models import CoVanishingReport, HolderReport, NormModularReport

logger = logging.getLogger("varexp")

FloatArray = npt.NDArray[np.float64]

LUXEMBURG_TOL = 1e-12
LUXEMBURG_MAX_ITER = 200
INEQUALITY_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class ExponentField:
    """An exponent such as p(x), q(x) or s(x), sampled at cell centres and at nodes.

    ``p_minus`` and ``p_plus`` are the extremes over the cell centres, where
    every quantity of the default quadrature is read. The nodal samples serve
    the lumped quadrature and must satisfy the same lower bound. ``allow_one``
    relaxes that bound to p >= 1, which the sublinear exponent q of the
    reaction problem may reach.
    """

    grid: Grid
    p_cells: FloatArray
    p_nodes: FloatArray
    expression: Expression | None = None
    allow_one: bool = False

    def __post_init__(self) -> None:
        cells = np.array(self.p_cells, dtype=float)
        nodes = np.array(self.p_nodes, dtype=float)
        if cells.shape != (self.grid.n_cells,) or nodes.shape != (self.grid.n_nodes,):
            raise GridError("exponent samples do not match the grid")
        if not (np.all(np.isfinite(cells)) and np.all(np.isfinite(nodes))):
            raise GridError("exponent samples must be finite")
        low = min(cells.min(), nodes.min())
        if low < 1.0 or (low == 1.0 and not self.allow_one):
            bound = ">= 1" if self.allow_one else "> 1"
            raise GridError(f"exponent must satisfy p(x) {bound}, got minimum {low}")
        cells.flags.writeable = False
        nodes.flags.writeable = False
        object.__setattr__(self, "p_cells", cells)
        object.__setattr__(self, "p_nodes", nodes)

    @classmethod
    def from_expression(
        cls, expr: Expression, grid: Grid, allow_one: bool = False
    ) -> ExponentField:
        return cls(
            grid,
            sample(expr, grid.centers),
            sample(expr, grid.nodes),
            expression=expr,
            allow_one=allow_one,
        )

    @classmethod
    def constant(cls, value: float, grid: Grid, allow_one: bool = False) -> ExponentField:
        return cls(
            grid,
            np.full(grid.n_cells, float(value)),
            np.full(grid.n_nodes, float(value)),
            allow_one=allow_one,
        )

    @property
    def p_minus(self) -> float:
        return float(self.p_cells.min())

    @property
    def p_plus(self) -> float:
        return float(self.p_cells.max())

    @property
    def is_constant(self) -> bool:
        return self.p_minus == self.p_plus

    def at_samples(self, quadrature: Quadrature) -> FloatArray:
        return self.p_cells if quadrature == "midpoint" else self.p_nodes

    def at(self, x: npt.ArrayLike) -> FloatArray:
        """Exponent at arbitrary points of [a, b]."""
        pts = np.asarray(x, dtype=float)
        if self.expression is not None:
            return sample(self.expression, pts)
        return np.asarray(np.interp(pts, self.grid.nodes, self.p_nodes), dtype=float)


def _check_grid(u: CellField, p: ExponentField) -> None:
    if u.grid != p.grid:
        raise GridError(f"grid mismatch: {u.grid} vs {p.grid}")


def _modular_values(values: FloatArray, p_cells: FloatArray, h: float) -> float:
    with np.errstate(over="ignore"):
        return float(np.sum(np.abs(values) ** p_cells * h))


def modular(u_cells: CellField, p: ExponentField) -> float:
    """rho_p(u) = integral of |u|^p(x) with the midpoint rule."""
    _check_grid(u_cells, p)
    return integrate(CellField(u_cells.grid, np.abs(u_cells.values) ** p.p_cells))


def luxemburg_norm(
    u_cells: CellField,
    p: ExponentField,
    tol: float = LUXEMBURG_TOL,
    max_iter: int = LUXEMBURG_MAX_ITER,
) -> float:
    """Luxemburg norm by bisection on the decreasing map sigma -> rho_p(u / sigma)."""
    _check_grid(u_cells, p)
    values = np.asarray(u_cells.values)
    if not np.any(values):
        return 0.0
    h = u_cells.grid.h

    def rho(sigma: float) -> float:
        return _modular_values(values / sigma, p.p_cells, h)

    lo = hi = 1.0
    if rho(1.0) > 1.0:
        while rho(hi) > 1.0:
            lo, hi = hi, hi * 2.0
            if not np.isfinite(hi):
                raise BracketError("could not bracket the Luxemburg norm from above")
    else:
        while rho(lo) <= 1.0:
            hi, lo = lo, lo * 0.5
            if lo == 0.0:
                raise BracketError("could not bracket the Luxemburg norm from below")

    best, best_residual = hi, abs(rho(hi) - 1.0)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        value = rho(mid)
        residual = abs(value - 1.0)
        if residual < best_residual:
            best, best_residual = mid, residual
        if residual <= tol or mid in (lo, hi):
            break
        if value > 1.0:
            lo = mid
        else:
            hi = mid
    return best


def check_norm_modular_bounds(u_cells: CellField, p: ExponentField) -> NormModularReport:
    """Check p_- / p_+ chains linking the norm and the modular."""
    norm = luxemburg_norm(u_cells, p)
    rho = modular(u_cells, p)
    if norm >= 1.0:
        branch, lower, upper = "norm>=1", norm**p.p_minus, norm**p.p_plus
    else:
        branch, lower, upper = "norm<1", norm**p.p_plus, norm**p.p_minus
    slack = INEQUALITY_SLACK * (1.0 + rho)
    holds = lower <= rho + slack and rho <= upper + slack
    return NormModularReport(
        norm=norm,
        modular=rho,
        p_minus=p.p_minus,
        p_plus=p.p_plus,
        branch=branch,
        lower=lower,
        upper=upper,
        holds=holds,
    )


def conjugate(p: ExponentField) -> ExponentField:
    return ExponentField(p.grid, p.p_cells / (p.p_cells - 1.0), p.p_nodes / (p.p_nodes - 1.0))


def holder_constant(p: ExponentField) -> float:
    return 1.0 / p.p_minus + 1.0 / conjugate(p).p_minus


def holder_check(f: CellField, g: CellField, p: ExponentField) -> HolderReport:
    require_same_grid(f, g)
    _check_grid(f, p)
    pc = conjugate(p)
    constant = holder_constant(p)
    lhs = integrate(CellField(f.grid, np.abs(f.values * g.values)))
    rhs = constant * luxemburg_norm(f, p) * luxemburg_norm(g, pc)
    return HolderReport(
        lhs=lhs,
        rhs=rhs,
        constant=constant,
        holds=lhs <= rhs + INEQUALITY_SLACK * (1.0 + rhs),
    )


def sobolev_norm(u: GridFunction, p: ExponentField) -> float:
    """||u||_{L^p(x)} + ||grad u||_{L^p(x)} on the cell samples."""
    return luxemburg_norm(nodes_to_cells(u), p) + luxemburg_norm(gradient(u), p)


def co_vanishing_check(u_cells: CellField, p: ExponentField, k: int = 10) -> CoVanishingReport:
    """Norm and modular of u / 2^j, j = 0..k, must both decrease towards 0."""
    norms: list[float] = []
    modulars: list[float] = []
    for j in range(k + 1):
        scaled = CellField(u_cells.grid, u_cells.values / 2.0**j)
        norms.append(luxemburg_norm(scaled, p))
        modulars.append(modular(scaled, p))
    monotone = bool(np.all(np.diff(norms) < 0.0) and np.all(np.diff(modulars) < 0.0))
    logger.debug("co-vanishing: last norm %.3e, last modular %.3e", norms[-1], modulars[-1])
    return CoVanishingReport(norms=norms, modulars=modulars, monotone=monotone)
