"""Discrete energies of the elliptic families, their exact gradients and a descent metric.

Gradient terms use the midpoint rule on cells with the cell-centred exponent.
Potentials follow the family's quadrature: by default u is averaged to the
cell centres and integrated with the midpoint rule against centre-sampled
coefficients; the lumped variant integrates at the nodes with trapezoid
weights. The residual of a family is the gradient of its implemented energy
with respect to the interior nodal values, so the two agree to rounding.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from varexp.elliptic.problems import (
    BarrierProblem,
    EllipticProblem,
    EpsPerturbed,
    FdeStep,
    ReactionPQ,
    Torsion,
)
from varexp.errors import GridError
from varexp.grid import GridFunction

FloatArray = npt.NDArray[np.float64]

# Relative regularisation of |D|^2 inside the curvature metric.
METRIC_DELTA = 1e-6


class Potential(NamedTuple):
    """Integrand of the potential at the sample points, its derivative and convex curvature."""

    value: FloatArray
    slope: FloatArray
    curvature: FloatArray


def _check(u: GridFunction, prob: EllipticProblem) -> FloatArray:
    if u.grid != prob.grid:
        raise GridError(f"grid mismatch: {u.grid} vs {prob.grid}")
    return u.values


def _pos_pow(u: FloatArray, e: FloatArray | float) -> FloatArray:
    """(u^+)^e, with 0 wherever u <= 0 (also when e = 0)."""
    safe = np.where(u > 0.0, u, 1.0)
    return np.where(u > 0.0, safe**e, 0.0)


def _gradient_energy(prob: EllipticProblem, u: FloatArray) -> float:
    grid = prob.grid
    d = np.diff(u) / grid.h
    p = prob.p.p_cells
    return float(np.sum(grid.h * np.abs(d) ** p / p))


def _flux_residual(prob: EllipticProblem, u: FloatArray) -> FloatArray:
    """d/du_i of sum_cells h |D|^p / p, i.e. phi_{i-1} - phi_i with phi = |D|^{p-1} sign D."""
    d = np.diff(u) / prob.grid.h
    phi = np.abs(d) ** (prob.p.p_cells - 1.0) * np.sign(d)
    out = np.zeros_like(u)
    out[1:] += phi
    out[:-1] -= phi
    return out


def _spread(prob: EllipticProblem, g: FloatArray) -> FloatArray:
    """Nodal gradient of sum_k w_k Phi(s_k) given g = Phi'(s) at the samples."""
    wg = prob.weights * g
    if prob.quadrature == "lumped":
        return wg
    out = np.zeros(prob.grid.n_nodes)
    out[:-1] += 0.5 * wg
    out[1:] += 0.5 * wg
    return out


def _safe_pow(s: FloatArray, e: FloatArray) -> FloatArray:
    safe = np.where(s > 0.0, s, 1.0)
    return np.where(s > 0.0, safe**e, 0.0)


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


def _potential(prob: EllipticProblem, s: FloatArray) -> Potential:
    """Potential of ``prob`` at the collocated values ``s``; J_eps is handled on its own."""
    zeros = np.zeros_like(s)
    if isinstance(prob, ReactionPQ):
        q, e = prob.exponent(prob.q), prob.exponent(prob.s)
        h, l = prob.h.values, prob.l.values  # noqa: E741
        return Potential(
            l * _pos_pow(s, e) / e - h * _pos_pow(s, q) / q,
            l * _pos_pow(s, e - 1.0) - h * _pos_pow(s, q - 1.0),
            l * (e - 1.0) * _pos_pow(s, e - 2.0),
        )
    if isinstance(prob, FdeStep):
        q = prob.q
        h0 = prob.h0.values
        return Potential(
            np.abs(s) ** (2.0 * q) / (2.0 * q)
            - h0 * _pos_pow(s, q) / q
            - prob.lam * prob.f.primitive(s),
            np.abs(s) ** (2.0 * q - 1.0) * np.sign(s)
            - h0 * _pos_pow(s, q - 1.0)
            - prob.lam * prob.f.value(s),
            (2.0 * q - 1.0) * np.abs(s) ** (2.0 * q - 2.0),
        )
    if isinstance(prob, Torsion):
        return Potential(-prob.K * s, np.full_like(s, -prob.K), zeros)
    if isinstance(prob, BarrierProblem):
        c = prob.c.values
        value = c * _pos_pow(s, prob.q) / prob.q + prob.K * s
        slope = c * _pos_pow(s, prob.q - 1.0) + prob.K
        if prob.f is not None:
            value = value + prob.mu * prob.f.primitive(s)
            slope = slope + prob.mu * prob.f.value(s)
        return Potential(-value, -slope, zeros)
    raise TypeError(f"unsupported problem type: {type(prob).__name__}")


def _gradient_scale(prob: EllipticProblem) -> float:
    return prob.lam if isinstance(prob, FdeStep) else 1.0


class _EpsPiece(NamedTuple):
    weight: float
    values: FloatArray
    left: float
    right: float


def _eps_pieces(prob: EpsPerturbed, u: FloatArray) -> list[_EpsPiece]:
    """Collocations of u inside (D^2 + eps u^2)^{p/2}, with their share of each cell node.

    Midpoint uses the cell average; lumped splits the cell between its nodes.
    """
    if prob.quadrature == "midpoint":
        return [_EpsPiece(1.0, prob.collocate(u), 0.5, 0.5)]
    return [_EpsPiece(0.5, u[:-1], 1.0, 0.0), _EpsPiece(0.5, u[1:], 0.0, 1.0)]


# ---------------------------------------------------------------------------
# Energies
# ---------------------------------------------------------------------------


def _energy_eps(prob: EpsPerturbed, u: FloatArray) -> float:
    grid = prob.grid
    p = prob.p.p_cells
    d = np.diff(u) / grid.h
    total = 0.0
    for piece in _eps_pieces(prob, u):
        sq = d**2 + prob.eps * piece.values**2
        total += piece.weight * float(np.sum(grid.h * sq ** (p / 2.0) / p))
    return total - float(np.sum(prob.weights * prob.g.primitive(prob.collocate(u))))


def energy_values(prob: EllipticProblem, u: FloatArray) -> float:
    """Energy of the nodal vector ``u`` (boundary entries included as given)."""
    if isinstance(prob, EpsPerturbed):
        return _energy_eps(prob, u)
    potential = _potential(prob, prob.collocate(u))
    gradient = _gradient_scale(prob) * _gradient_energy(prob, u)
    return gradient + float(np.sum(prob.weights * potential.value))


def energy_reaction(u: GridFunction, prob: ReactionPQ) -> float:
    """E(u) = int |u'|^p/p + int l (u^+)^s/s - int h (u^+)^q/q."""
    return energy_values(prob, _check(u, prob))


def energy_fde_step(v: GridFunction, prob: FdeStep) -> float:
    """J(v) = int |v|^{2q}/(2q) + lam int |v'|^p/p - int h0 (v^+)^q/q - lam int F(x, v)."""
    return energy_values(prob, _check(v, prob))


def energy_eps(u: GridFunction, prob: EpsPerturbed) -> float:
    """J_eps(u); by default eps u^2 is read at the cell average of u."""
    return _energy_eps(prob, _check(u, prob))


def energy_torsion(u: GridFunction, prob: Torsion) -> float:
    return energy_values(prob, _check(u, prob))


def energy_barrier(u: GridFunction, prob: BarrierProblem) -> float:
    return energy_values(prob, _check(u, prob))


def energy(u: GridFunction, prob: EllipticProblem) -> float:
    return energy_values(prob, _check(u, prob))


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------


def _eps_residual(prob: EpsPerturbed, u: FloatArray) -> FloatArray:
    h = prob.grid.h
    p = prob.p.p_cells
    d = np.diff(u) / h
    out = np.zeros_like(u)
    for piece in _eps_pieces(prob, u):
        a = _safe_pow(d**2 + prob.eps * piece.values**2, p / 2.0 - 1.0)
        psi = piece.weight * d * a
        out[1:] += psi
        out[:-1] -= psi
        node = piece.weight * h * prob.eps * piece.values * a
        out[:-1] += piece.left * node
        out[1:] += piece.right * node
    return out - _spread(prob, prob.g.value(prob.collocate(u)))


def residual_values(prob: EllipticProblem, u: FloatArray) -> FloatArray:
    """Full nodal gradient of the energy; the solver reads the interior entries."""
    if isinstance(prob, EpsPerturbed):
        return _eps_residual(prob, u)
    potential = _potential(prob, prob.collocate(u))
    flux = _gradient_scale(prob) * _flux_residual(prob, u)
    return flux + _spread(prob, potential.slope)


def residual(u: GridFunction, prob: EllipticProblem) -> GridFunction:
    """Discrete Euler-Lagrange residual R_i = dE/du_i on interior nodes, 0 on the boundary."""
    values = residual_values(prob, _check(u, prob))
    values[0] = values[-1] = 0.0
    return GridFunction(prob.grid, values, True)


# ---------------------------------------------------------------------------
# Descent metric
# ---------------------------------------------------------------------------


def _add_sample_curvature(
    prob: EllipticProblem, diag: FloatArray, off: FloatArray, k: FloatArray
) -> None:
    """Adds sum_k w_k k_k (grad s_k)(grad s_k)^T, which is positive semidefinite for k >= 0."""
    wk = prob.weights * k
    if prob.quadrature == "lumped":
        diag += wk
        return
    diag[:-1] += 0.25 * wk
    diag[1:] += 0.25 * wk
    off += 0.25 * wk


def curvature_bands(prob: EllipticProblem, u: FloatArray) -> FloatArray:
    """Banded (1, 1) storage of an SPD tridiagonal curvature model on interior nodes.

    Cell stiffness scale * (p - 1) (D^2 + delta^2)^{(p-2)/2} / h, plus the
    nonnegative part of the potential curvature pushed through the collocation.
    """
    grid = prob.grid
    h = grid.h
    p = prob.p.p_cells
    d = np.diff(u) / h
    if isinstance(prob, EpsPerturbed):
        pieces = _eps_pieces(prob, u)
        mean_u2 = sum(piece.weight * piece.values**2 for piece in pieces)
        sq = d**2 + prob.eps * mean_u2
    else:
        sq = d**2
    delta2 = METRIC_DELTA * float(np.mean(sq)) + 1e-12
    stiffness = _gradient_scale(prob) * (p - 1.0) * (sq + delta2) ** (p / 2.0 - 1.0) / h

    diag = np.zeros(grid.n_nodes)
    off = np.zeros(grid.n_cells)
    diag[:-1] += stiffness
    diag[1:] += stiffness
    off -= stiffness
    if isinstance(prob, EpsPerturbed):
        for piece in pieces:
            k = piece.weight * h * prob.eps * (sq + delta2) ** (p / 2.0 - 1.0)
            diag[:-1] += piece.left**2 * k
            diag[1:] += piece.right**2 * k
            off += piece.left * piece.right * k
    else:
        _add_sample_curvature(prob, diag, off, _potential(prob, prob.collocate(u)).curvature)

    n_int = grid.n_nodes - 2
    bands = np.zeros((3, n_int))
    bands[0, 1:] = off[1:-1]
    bands[1, :] = diag[1:-1]
    bands[2, :-1] = off[1:-1]
    return bands
