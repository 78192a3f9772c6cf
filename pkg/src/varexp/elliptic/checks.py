"""Numerical conclusion checks on computed elliptic solutions."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from varexp.elliptic.energy import energy_values
from varexp.elliptic.problems import EpsPerturbed, FdeStep
from varexp.errors import PreconditionError
from varexp.grid import (
    Coefficient,
    GridFunction,
    boundary_flux,
    collocate,
    quadrature_of,
    require_same_grid,
    sample_weights,
)
from varexp.models import EllipticContractionReport, PositivityReport, RayConvexityReport
from varexp.telemetry.logger import log_check

FloatArray = npt.NDArray[np.float64]

ORDER_TOL = 1e-12
HOPF_RATIO = 0.5
CONVEXITY_TOL = 1e-9
CONTRACTION_TOL = 1e-6


def ordering_check(u: GridFunction, v: GridFunction, tol: float = ORDER_TOL) -> bool:
    """True iff u >= v - tol at every node."""
    require_same_grid(u, v)
    return bool(np.all(u.values >= v.values - tol))


def positivity_and_hopf_check(
    u: GridFunction,
    delta_interior: float | None = None,
    hopf_ratio: float = HOPF_RATIO,
) -> PositivityReport:
    """Interior positivity and a discrete Hopf boundary condition.

    Positivity is judged on nodes at distance >= ``delta_interior`` (default h)
    from the boundary. The Hopf condition needs both outward difference
    quotients strictly negative and at least ``hopf_ratio`` times the slope of
    the neighbouring cell in magnitude, which separates a linear departure
    from the boundary from a flat one at any resolution.
    """
    grid = u.grid
    delta = grid.h if delta_interior is None else delta_interior
    x = grid.nodes
    mask = (x - grid.a >= delta - 1e-14) & (grid.b - x >= delta - 1e-14)
    inner = u.values[mask]
    min_interior = float(np.min(inner)) if inner.size else float("nan")
    positive = bool(inner.size and min_interior > 0.0)

    out_a, out_b = boundary_flux(u)
    v = u.values
    slope_a = (v[2] - v[1]) / grid.h
    slope_b = (v[-2] - v[-3]) / grid.h
    hopf_a = out_a < 0.0 and abs(out_a) >= hopf_ratio * abs(slope_a)
    hopf_b = out_b < 0.0 and abs(out_b) >= hopf_ratio * abs(slope_b)
    report = PositivityReport(
        min_interior=min_interior,
        positive=positive,
        outward_derivatives=(float(out_a), float(out_b)),
        interior_slopes=(float(slope_a), float(slope_b)),
        hopf_ratio=hopf_ratio,
        hopf_ok=bool(hopf_a and hopf_b),
    )
    return report


def elliptic_contraction_check(
    v1: GridFunction,
    v2: GridFunction,
    h1: Coefficient,
    h2: Coefficient,
    q: float,
    tol: float = CONTRACTION_TOL,
) -> EllipticContractionReport:
    """||(v1^q - v2^q)^+||_2 <= ||(h1 - h2)^+||_2 for two solutions of the Euler-step problem.

    Norms use the quadrature given by the layout of the coefficients, with v
    collocated accordingly.
    """
    grid = require_same_grid(v1, v2, h1, h2)
    if type(h1) is not type(h2):
        raise PreconditionError("h1 and h2 must share a layout")
    quadrature = quadrature_of(h1)
    w = sample_weights(grid, quadrature)

    def norm(values: FloatArray) -> float:
        return float(np.sqrt(np.sum(w * values**2)))

    a = np.maximum(collocate(v1.values, quadrature), 0.0) ** q
    b = np.maximum(collocate(v2.values, quadrature), 0.0) ** q
    lhs = norm(np.maximum(a - b, 0.0))
    rhs = norm(np.maximum(h1.values - h2.values, 0.0))
    scale = 1.0 + norm(a) + norm(b)
    violation = max(0.0, lhs - rhs)
    holds = violation <= tol * scale
    log_check("elliptic_contraction", holds, {"lhs": lhs, "rhs": rhs})
    return EllipticContractionReport(
        lhs=lhs, rhs=rhs, violation=violation, tol=tol * scale, holds=holds
    )


def _require_positive_interior(v: GridFunction, name: str) -> None:
    if not v.dirichlet_zero:
        raise PreconditionError(f"{name} must have zero trace")
    if np.any(v.interior <= 0.0):
        raise PreconditionError(f"{name} must be positive on interior nodes")


def _second_differences(
    t: FloatArray, energies: FloatArray, power: float, name: str
) -> RayConvexityReport:
    second = energies[:-2] - 2.0 * energies[1:-1] + energies[2:]
    scale = 1.0 + float(np.max(np.abs(energies)))
    min_second = float(np.min(second)) if second.size else 0.0
    holds = min_second >= -CONVEXITY_TOL * scale
    log_check(name, holds, {"min_second_difference": min_second, "power": power})
    return RayConvexityReport(
        name=name,
        power=power,
        t_values=t.tolist(),
        energies=energies.tolist(),
        second_differences=second.tolist(),
        min_second_difference=min_second,
        scale=scale,
        holds=holds,
    )


def hidden_convexity_scan(
    prob: EpsPerturbed,
    v0: GridFunction,
    v1: GridFunction,
    m: float,
    n_t: int = 64,
) -> RayConvexityReport:
    """Samples t -> J_eps(((1 - t) v0 + t v1)^{1/m}) on n_t + 1 uniform points.

    v0 and v1 play the role of the m-th powers of the compared functions.
    """
    require_same_grid(v0, v1)
    _require_positive_interior(v0, "v0")
    _require_positive_interior(v1, "v1")
    if not 1.0 <= m <= prob.p.p_minus + 1e-12:
        raise PreconditionError(f"m must lie in [1, p_-], got {m}")
    if n_t < 2:
        raise PreconditionError("n_t must be >= 2")
    t = np.linspace(0.0, 1.0, n_t + 1)
    energies = np.array(
        [energy_values(prob, ((1.0 - s) * v0.values + s * v1.values) ** (1.0 / m)) for s in t]
    )
    return _second_differences(t, energies, m, "hidden_convexity")


def ray_convexity_scan(
    prob: FdeStep,
    v0: GridFunction,
    v1: GridFunction,
    n_t: int = 64,
) -> RayConvexityReport:
    """Samples t -> J(((1 - t) v0^q + t v1^q)^{1/q}) for the Euler-step energy."""
    require_same_grid(v0, v1)
    _require_positive_interior(v0, "v0")
    _require_positive_interior(v1, "v1")
    if n_t < 2:
        raise PreconditionError("n_t must be >= 2")
    q = prob.q
    a, b = v0.values**q, v1.values**q
    t = np.linspace(0.0, 1.0, n_t + 1)
    energies = np.array(
        [energy_values(prob, ((1.0 - s) * a + s * b) ** (1.0 / q)) for s in t]
    )
    return _second_differences(t, energies, q, "ray_convexity")
