"""Cellwise verification of Picone-type inequalities and the Diaz-Saa integral.

Composite functions (v^{1/r}, v / v0^{(r-1)/r}, u^r / v^{r-1}, ...) are formed
at the nodes and then differentiated with the grid gradient, so each check is
a statement about discrete functions. Where a base value vanishes (boundary
nodes of zero-trace data) the composite is set to 0; the numerator must
vanish there too.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from varexp.errors import PreconditionError
from varexp.grid import Grid, GridFunction, gradient, require_same_grid
from varexp.kernels.base import AnisoKernel, OperatorKernel
from varexp.kernels.builtin import PLaplacianKernel
from varexp.models import DiazSaaReport, PiconeReport
from varexp.vxspace import ExponentField

logger = logging.getLogger("varexp")

FloatArray = npt.NDArray[np.float64]

DEFAULT_FLOOR = 1e-8
DEFAULT_TOL = 1e-9
R_SLACK = 1e-12


def _check_r(r: float, p_minus: float) -> None:
    if r < 1.0 or r > p_minus + R_SLACK:
        raise PreconditionError(f"r must lie in [1, p_-] = [1, {p_minus}], got {r}")


def _check_nonnegative(v: GridFunction, name: str) -> None:
    if np.any(v.values < 0.0):
        raise PreconditionError(f"{name} must be nonnegative")


def _check_floor(v: GridFunction, floor: float, name: str) -> None:
    if floor <= 0.0:
        raise PreconditionError(f"floor must be positive, got {floor}")
    if np.any(v.interior < floor):
        raise PreconditionError(f"{name} drops below floor={floor} on interior nodes")


def _quotient(num: FloatArray, base: FloatArray, power: float) -> FloatArray:
    """num / base^power with 0 where the base vanishes (and power > 0)."""
    if power == 0.0:
        return num.copy()
    zero = base == 0.0
    if np.any(zero & (num != 0.0)):
        raise PreconditionError("composite undefined: nonzero numerator over a vanishing base")
    safe = np.where(zero, 1.0, base)
    return np.where(zero, 0.0, num / safe**power)


def _gap_report(
    name: str,
    grid: Grid,
    lhs: FloatArray,
    rhs: FloatArray,
    tol: float,
    c_h: float,
) -> PiconeReport:
    gaps = rhs - lhs
    rel_tol = tol * (1.0 + np.abs(rhs))
    cell_tol = np.maximum(rel_tol, c_h * grid.h**2)
    violating = np.flatnonzero(gaps < -cell_tol)
    equality = np.flatnonzero(np.abs(gaps) <= cell_tol)
    report = PiconeReport(
        name=name,
        h=grid.h,
        min_gap=float(np.min(gaps)),
        violating_cells=violating.tolist(),
        equality_cells=equality.tolist(),
        tol=tol,
        c_h=c_h,
        lhs=lhs.tolist(),
        rhs=rhs.tolist(),
        gaps=gaps.tolist(),
        raw_verdict=bool(np.all(gaps >= -rel_tol)),
        h_scaled_verdict=violating.size == 0,
    )
    logger.debug("%s: min_gap=%.3e, %d violating cells", name, report.min_gap, violating.size)
    return report


def _picone_terms(
    k: OperatorKernel, v: GridFunction, v0: GridFunction, r: float, floor: float
) -> tuple[FloatArray, FloatArray]:
    grid = require_same_grid(v, v0)
    _check_r(r, k.exponent.p_minus)
    _check_nonnegative(v, "v")
    _check_nonnegative(v0, "v0")
    _check_floor(v0, floor, "v0")
    alpha = v0.values ** (1.0 / r)
    beta = v.values ** (1.0 / r)
    ratio = _quotient(v.values, v0.values, (r - 1.0) / r)
    x = grid.centers
    d_alpha = np.diff(alpha) / grid.h
    d_beta = np.diff(beta) / grid.h
    d_ratio = np.diff(ratio) / grid.h
    p = k.p_at(x)
    lhs = k.flux(x, d_alpha) * d_ratio
    rhs = k.evaluate(x, d_beta) ** (r / p) * k.evaluate(x, d_alpha) ** ((p - r) / p)
    return lhs, rhs


def picone_gap(
    k: OperatorKernel,
    v: GridFunction,
    v0: GridFunction,
    r: float,
    floor: float = DEFAULT_FLOOR,
    tol: float = DEFAULT_TOL,
    c_h: float = 0.0,
) -> PiconeReport:
    """Per-cell gap of the generalised Picone inequality.

    LHS = a(x, grad v0^{1/r}) . grad(v / v0^{(r-1)/r}),
    RHS = A(x, grad v^{1/r})^{r/p} * A(x, grad v0^{1/r})^{(p-r)/p}.
    """
    lhs, rhs = _picone_terms(k, v, v0, r, floor)
    return _gap_report("picone", v.grid, lhs, rhs, tol, c_h)


def picone_plap_pair_gap(
    u: GridFunction,
    v: GridFunction,
    r: float,
    p: ExponentField,
    floor: float = DEFAULT_FLOOR,
    tol: float = DEFAULT_TOL,
    c_h: float = 0.0,
) -> PiconeReport:
    """Symmetric p(x)-Laplacian form: |grad u|^p + |grad v|^p against both cross terms."""
    grid = require_same_grid(u, v)
    _check_r(r, p.p_minus)
    _check_floor(u, floor, "u")
    _check_floor(v, floor, "v")
    _check_nonnegative(u, "u")
    _check_nonnegative(v, "v")
    k = PLaplacianKernel(p)
    x = grid.centers
    du = gradient(u).values
    dv = gradient(v).values
    comp_uv = np.diff(_quotient(u.values**r, v.values, r - 1.0)) / grid.h
    comp_vu = np.diff(_quotient(v.values**r, u.values, r - 1.0)) / grid.h
    lhs = k.flux(x, dv) * comp_uv + k.flux(x, du) * comp_vu
    rhs = k.evaluate(x, du) + k.evaluate(x, dv)
    return _gap_report("picone_plap_pair", grid, lhs, rhs, tol, c_h)


def _diaz_saa_cells(
    k: OperatorKernel, w1: GridFunction, w2: GridFunction, r: float, floor: float
) -> tuple[FloatArray, FloatArray]:
    grid = require_same_grid(w1, w2)
    _check_r(r, k.exponent.p_minus)
    for name, w in (("w1", w1), ("w2", w2)):
        if not w.dirichlet_zero:
            raise PreconditionError(f"{name} must have zero trace")
        _check_floor(w, floor, name)
    a1, a2 = w1.values**r, w2.values**r
    test1 = _quotient(a1 - a2, w1.values, r - 1.0)
    test2 = _quotient(a2 - a1, w2.values, r - 1.0)
    x = grid.centers
    g1 = gradient(w1).values
    g2 = gradient(w2).values
    integrand = k.flux(x, g1) * (np.diff(test1) / grid.h) + k.flux(x, g2) * (
        np.diff(test2) / grid.h
    )
    energy = k.evaluate(x, g1) + k.evaluate(x, g2)
    return integrand, energy


def diaz_saa_integral(
    k: OperatorKernel,
    w1: GridFunction,
    w2: GridFunction,
    r: float,
    floor: float = DEFAULT_FLOOR,
) -> float:
    """Weak form of the Diaz-Saa inequality; nonnegative for admissible pairs."""
    integrand, _ = _diaz_saa_cells(k, w1, w2, r, floor)
    return float(np.sum(integrand * w1.grid.h))


def diaz_saa_check(
    k: OperatorKernel,
    w1: GridFunction,
    w2: GridFunction,
    r: float,
    floor: float = DEFAULT_FLOOR,
    tol: float = DEFAULT_TOL,
) -> DiazSaaReport:
    integrand, energy = _diaz_saa_cells(k, w1, w2, r, floor)
    h = w1.grid.h
    integral = float(np.sum(integrand * h))
    scale = 1.0 + float(np.sum(energy * h))
    return DiazSaaReport(
        r=r, integral=integral, scale=scale, tol=tol, holds=integral >= -tol * scale
    )


def _check_components(ak: AnisoKernel, *lists: Sequence[GridFunction]) -> None:
    for funcs in lists:
        if len(funcs) != len(ak.components):
            raise PreconditionError(
                f"expected {len(ak.components)} component functions, got {len(funcs)}"
            )


def aniso_picone_gap(
    ak: AnisoKernel,
    v: Sequence[GridFunction],
    v0: Sequence[GridFunction],
    r: float,
    floor: float = DEFAULT_FLOOR,
    tol: float = DEFAULT_TOL,
    c_h: float = 0.0,
) -> PiconeReport:
    """Anisotropic form: each direction uses its own kernel B_i on its own 1D samples."""
    _check_components(ak, v, v0)
    _check_r(r, ak.p_minus)
    lhs_total: FloatArray | None = None
    rhs_total: FloatArray | None = None
    for kernel, vi, v0i in zip(ak.components, v, v0):
        lhs, rhs = _picone_terms(kernel, vi, v0i, r, floor)
        lhs_total = lhs if lhs_total is None else lhs_total + lhs
        rhs_total = rhs if rhs_total is None else rhs_total + rhs
    assert lhs_total is not None and rhs_total is not None
    return _gap_report("aniso_picone", v[0].grid, lhs_total, rhs_total, tol, c_h)


def aniso_diaz_saa_integral(
    ak: AnisoKernel,
    w1: Sequence[GridFunction],
    w2: Sequence[GridFunction],
    r: float,
    floor: float = DEFAULT_FLOOR,
) -> float:
    _check_components(ak, w1, w2)
    return sum(
        diaz_saa_integral(kernel, a, b, r, floor) for kernel, a, b in zip(ak.components, w1, w2)
    )


def refinement_constant(reports: Sequence[PiconeReport]) -> float:
    """c_h = max over a refinement sequence of max(0, -min_gap) / h^2."""
    return max((max(0.0, -rep.min_gap) / rep.h**2 for rep in reports), default=0.0)
