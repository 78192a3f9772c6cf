"""Uniform 1D mesh, nodal and cell-centred fields, and the quadratures built on them."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import numpy.typing as npt

from varexp.errors import GridError
from varexp.expr import Expression, sample

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of (a, b) with ``n_cells`` cells."""

    a: float
    b: float
    n_cells: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.b <= self.a:
            raise GridError(f"invalid bounds: need a < b, got a={self.a}, b={self.b}")
        if self.n_cells < 2:
            raise GridError(f"n_cells must be >= 2, got {self.n_cells}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @property
    def nodes(self) -> FloatArray:
        return np.linspace(self.a, self.b, self.n_cells + 1)

    @property
    def centers(self) -> FloatArray:
        return self.a + (np.arange(self.n_cells) + 0.5) * self.h

    @property
    def nodal_weights(self) -> FloatArray:
        """Trapezoid weights: h on interior nodes, h/2 on the two boundary nodes."""
        w = np.full(self.n_nodes, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


def _frozen(values: npt.ArrayLike, size: int, what: str) -> FloatArray:
    arr = np.array(values, dtype=float)
    if arr.shape != (size,):
        raise GridError(f"{what} needs {size} values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GridError(f"{what} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal field; ``dirichlet_zero`` marks membership of the zero-trace space."""

    grid: Grid
    values: FloatArray
    dirichlet_zero: bool = False

    def __post_init__(self) -> None:
        values = _frozen(self.values, self.grid.n_nodes, "GridFunction")
        if self.dirichlet_zero and (values[0] != 0.0 or values[-1] != 0.0):
            raise GridError("dirichlet_zero set but boundary values are not 0")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_expression(
        cls,
        expr: Expression,
        grid: Grid,
        dirichlet_zero: bool = True,
        t: float | None = None,
    ) -> GridFunction:
        values = sample(expr, grid.nodes, t)
        if dirichlet_zero:
            values[0] = values[-1] = 0.0
        return cls(grid, values, dirichlet_zero)

    @classmethod
    def zeros(cls, grid: Grid) -> GridFunction:
        return cls(grid, np.zeros(grid.n_nodes), True)

    @property
    def interior(self) -> FloatArray:
        return self.values[1:-1]

    def with_values(self, values: npt.ArrayLike) -> GridFunction:
        """Same grid, new values; the zero trace is re-imposed when it was set."""
        arr = np.array(values, dtype=float)
        if self.dirichlet_zero:
            arr[0] = arr[-1] = 0.0
        return GridFunction(self.grid, arr, self.dirichlet_zero)


@dataclass(frozen=True, eq=False)
class CellField:
    """Per-cell samples (gradients, exponents, integrands)."""

    grid: Grid
    values: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen(self.values, self.grid.n_cells, "CellField"))

    @classmethod
    def from_expression(cls, expr: Expression, grid: Grid, t: float | None = None) -> CellField:
        return cls(grid, sample(expr, grid.centers, t))

    @classmethod
    def constant(cls, value: float, grid: Grid) -> CellField:
        return cls(grid, np.full(grid.n_cells, float(value)))

    def with_values(self, values: npt.ArrayLike) -> CellField:
        return CellField(self.grid, values)


# Where potentials are sampled: cell centres with u averaged from the nodes
# ("midpoint"), or the nodes themselves with trapezoid weights ("lumped").
Quadrature = Literal["midpoint", "lumped"]
QUADRATURES: tuple[Quadrature, ...] = ("midpoint", "lumped")

Coefficient = CellField | GridFunction


def check_quadrature(quadrature: str) -> Quadrature:
    if quadrature not in QUADRATURES:
        raise GridError(f"unknown quadrature '{quadrature}', expected one of {QUADRATURES}")
    return quadrature  # type: ignore[return-value]


def sample_points(grid: Grid, quadrature: Quadrature) -> FloatArray:
    return grid.centers if quadrature == "midpoint" else grid.nodes


def sample_weights(grid: Grid, quadrature: Quadrature) -> FloatArray:
    if quadrature == "midpoint":
        return np.full(grid.n_cells, grid.h)
    return grid.nodal_weights


def collocate(values: FloatArray, quadrature: Quadrature) -> FloatArray:
    """Nodal values at the sample points of ``quadrature``."""
    if quadrature == "midpoint":
        return 0.5 * (values[:-1] + values[1:])
    return values


def coefficient(grid: Grid, values: npt.ArrayLike, quadrature: Quadrature) -> Coefficient:
    if quadrature == "midpoint":
        return CellField(grid, values)
    return GridFunction(grid, values)


def coefficient_from_expression(
    expr: Expression, grid: Grid, quadrature: Quadrature, t: float | None = None
) -> Coefficient:
    return coefficient(grid, sample(expr, sample_points(grid, quadrature), t), quadrature)


def quadrature_of(field: Coefficient) -> Quadrature:
    return "midpoint" if isinstance(field, CellField) else "lumped"


def l2_norm(field: Coefficient) -> float:
    """L^2 norm with the quadrature matching the layout of ``field``."""
    w = sample_weights(field.grid, quadrature_of(field))
    return float(np.sqrt(np.sum(field.values**2 * w)))


def build_uniform(a: float, b: float, n_cells: int) -> Grid:
    return Grid(float(a), float(b), int(n_cells))


def require_same_grid(*fields: GridFunction | CellField) -> Grid:
    grid = fields[0].grid
    for other in fields[1:]:
        if other.grid != grid:
            raise GridError(f"grid mismatch: {grid} vs {other.grid}")
    return grid


def gradient(u: GridFunction) -> CellField:
    """Cell-centred difference quotients (u_{i+1} - u_i) / h."""
    return CellField(u.grid, np.diff(u.values) / u.grid.h)


def integrate(c: CellField) -> float:
    """Midpoint rule; numpy's reduction order is fixed, so results are reproducible."""
    return float(np.sum(c.values * c.grid.h))


def l2_norm_nodal(u: GridFunction) -> float:
    return float(np.sqrt(np.sum(u.values**2 * u.grid.nodal_weights)))


def nodes_to_cells(u: GridFunction) -> CellField:
    return CellField(u.grid, 0.5 * (u.values[:-1] + u.values[1:]))


def boundary_flux(u: GridFunction) -> tuple[float, float]:
    """Outward-normal one-sided derivatives at a and b."""
    if not u.dirichlet_zero:
        raise GridError("boundary_flux needs a zero-trace (Dirichlet) function")
    h = u.grid.h
    v = u.values
    return (-(v[1] - v[0]) / h, (v[-1] - v[-2]) / h)


def write_csv(u: GridFunction, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        np.column_stack([u.grid.nodes, u.values]),
        delimiter=",",
        header="x,value",
        comments="",
        fmt="%.17g",
    )
    return path


def read_csv(path: str | Path) -> GridFunction:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    x, values = data[:, 0], data[:, 1]
    grid = build_uniform(x[0], x[-1], len(x) - 1)
    return GridFunction(grid, values, bool(values[0] == 0.0 and values[-1] == 0.0))
