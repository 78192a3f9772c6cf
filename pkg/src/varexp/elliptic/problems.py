"""Elliptic problem families, source terms and their hypothesis validators.

Reaction coefficients (h, l, h0, c), source coefficients and the exponents
of the potentials (q, s) live where the family's quadrature samples its
potentials: at cell centres by default, at the nodes for the lumped variant.
The gradient exponent p is always read at the cell centres.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import ClassVar, Literal

import numpy as np
import numpy.typing as npt

from varexp.errors import PreconditionError
from varexp.grid import (
    CellField,
    Coefficient,
    Grid,
    GridFunction,
    Quadrature,
    check_quadrature,
    collocate,
    sample_weights,
)
from varexp.models import Family
from varexp.vxspace import ExponentField

FloatArray = npt.NDArray[np.float64]

SourceKind = Literal["zero", "constant", "power"]


@dataclass(frozen=True, eq=False)
class SourceF:
    """A nonnegative source f(x, s): zero, c(x) for s >= 0, or c(x) s^{gamma-1}.

    ``c`` is a scalar or an array sampled like the coefficients of the problem
    that uses it. F is the primitive extended by 0 for s < 0. The constant kind
    has a kink at s = 0; ``value`` returns the right derivative c there.
    """

    kind: SourceKind
    c: FloatArray | float = 0.0
    gamma: float = 2.0

    def __post_init__(self) -> None:
        c = np.array(self.c, dtype=float)
        if c.ndim > 1 or not np.all(np.isfinite(c)):
            raise PreconditionError("source coefficient must be a finite scalar or 1D array")
        c.flags.writeable = False
        object.__setattr__(self, "c", c)

    @classmethod
    def zero(cls) -> SourceF:
        return cls("zero", 0.0)

    @classmethod
    def constant(cls, c: FloatArray | float) -> SourceF:
        return cls("constant", c)

    @classmethod
    def power(cls, c: FloatArray | float, gamma: float) -> SourceF:
        return cls("power", c, gamma)

    def value(self, s: FloatArray) -> FloatArray:
        if self.kind == "zero":
            return np.zeros_like(s)
        if self.kind == "constant":
            return np.where(s >= 0.0, self.c, 0.0)
        pos = np.maximum(s, 0.0)
        return np.where(s > 0.0, self.c * pos ** (self.gamma - 1.0), 0.0)

    def primitive(self, s: FloatArray) -> FloatArray:
        pos = np.maximum(s, 0.0)
        if self.kind == "zero":
            return np.zeros_like(s)
        if self.kind == "constant":
            return self.c * pos
        return self.c * pos**self.gamma / self.gamma

    def scaled(self, factor: float) -> SourceF:
        return SourceF(self.kind, self.c * factor, self.gamma)


def source_violations(f: SourceF, q: float, waive_f2: bool = False) -> list[str]:
    """Violated hypotheses among (f1)-(f3) for a source used with exponent q."""
    out: list[str] = []
    if np.any(f.c < 0.0):
        out.append("f >= 0 violated")
    if f.kind == "power" and f.gamma <= 1.0:
        out.append("(f1) f(x,0) = 0 violated: power source needs gamma > 1")
    if f.kind == "power" and f.gamma > q:
        out.append(f"(f3) f/s^(q-1) nonincreasing violated: gamma={f.gamma} > q={q}")
    if not waive_f2:
        if f.kind == "zero" or not np.any(f.c > 0.0):
            out.append("(f2) f/s^(2q-1) -> infinity violated: f is identically 0")
        elif f.kind == "power" and f.gamma >= 2.0 * q:
            out.append(f"(f2) f/s^(2q-1) -> infinity violated: gamma={f.gamma} >= 2q")
    return out


def g_violations(g: SourceF, m: float) -> list[str]:
    """Violated parts of (f1) and of 's -> g/s^(m-1) decreasing'."""
    out: list[str] = []
    if np.any(g.c < 0.0):
        out.append("g >= 0 violated")
    if g.kind == "zero" or not np.any(g.c > 0.0):
        out.append("(g~) violated: g is identically 0")
    elif g.kind == "power":
        if g.gamma <= 1.0:
            out.append("(f1) g(x,0) = 0 violated: power source needs gamma > 1")
        if g.gamma >= m:
            out.append(f"(g~) g/s^(m-1) decreasing violated: gamma={g.gamma} >= m={m}")
    elif g.kind == "constant" and m <= 1.0:
        out.append("(g~) g/s^(m-1) decreasing violated: constant g needs m > 1")
    return out


@dataclass(frozen=True, eq=False)
class EllipticProblem:
    """Common part of every family: the gradient exponent p, its grid and the quadrature.

    Under ``quadrature="midpoint"`` every coefficient is a CellField and u is
    averaged from the nodes to the cell centres before a potential is
    evaluated; under ``"lumped"`` coefficients are GridFunctions and
    potentials take trapezoid weights at the nodes.
    """

    p: ExponentField
    quadrature: Quadrature = field(default="midpoint", kw_only=True)
    family: ClassVar[Family]

    def __post_init__(self) -> None:
        check_quadrature(self.quadrature)
        expected = CellField if self.quadrature == "midpoint" else GridFunction
        size = self.n_samples
        for fld in dataclasses.fields(self):
            value = getattr(self, fld.name)
            if isinstance(value, (CellField, GridFunction)):
                if not isinstance(value, expected):
                    raise PreconditionError(
                        f"{fld.name} must be a {expected.__name__} "
                        f"under {self.quadrature} quadrature"
                    )
                if value.grid != self.grid:
                    raise PreconditionError(f"{fld.name} lives on {value.grid}, p on {self.grid}")
            elif isinstance(value, SourceF) and value.c.ndim == 1 and value.c.size != size:
                raise PreconditionError(
                    f"{fld.name}.c has {value.c.size} samples, "
                    f"{self.quadrature} quadrature needs {size}"
                )

    @property
    def grid(self) -> Grid:
        return self.p.grid

    @property
    def n_samples(self) -> int:
        return self.grid.n_cells if self.quadrature == "midpoint" else self.grid.n_nodes

    @property
    def weights(self) -> FloatArray:
        return sample_weights(self.grid, self.quadrature)

    def collocate(self, u: FloatArray) -> FloatArray:
        return collocate(u, self.quadrature)

    def exponent(self, e: ExponentField) -> FloatArray:
        return e.at_samples(self.quadrature)


@dataclass(frozen=True, eq=False)
class ReactionPQ(EllipticProblem):
    """-Delta_p u = h u^{q-1} - l u^{s-1}, with q_+ < p_- < s_-."""

    h: Coefficient
    l: Coefficient  # noqa: E741
    q: ExponentField
    s: ExponentField
    family: ClassVar[Family] = Family.REACTION_PQ


@dataclass(frozen=True, eq=False)
class FdeStep(EllipticProblem):
    """v^{2q-1} - lam Delta_p v = h0 v^{q-1} + lam f(x, v)."""

    lam: float
    q: float
    h0: Coefficient
    f: SourceF
    family: ClassVar[Family] = Family.FDE_STEP


@dataclass(frozen=True, eq=False)
class EpsPerturbed(EllipticProblem):
    """Euler-Lagrange problem of J_eps(u) = int (|u'|^2 + eps u^2)^{p/2}/p - int G(x, u)."""

    eps: float
    m: float
    g: SourceF
    family: ClassVar[Family] = Family.EPS_PERTURBED


@dataclass(frozen=True, eq=False)
class Torsion(EllipticProblem):
    """-Delta_p w = K."""

    K: float
    family: ClassVar[Family] = Family.TORSION


@dataclass(frozen=True, eq=False)
class BarrierProblem(EllipticProblem):
    """-Delta_p w = c(x) w^{q-1} + mu f(x, w) + K.

    Covers the sub- and supersolution problems of the Euler scheme and the
    stationary problem -Delta_p v = h v^{q-1} + f(x, v).
    """

    c: Coefficient
    q: float
    mu: float = 1.0
    f: SourceF | None = None
    K: float = 0.0
    family: ClassVar[Family] = Family.BARRIER


def check_hypotheses(prob: EllipticProblem) -> list[str]:
    """Violated structural hypotheses of ``prob``; empty when admissible."""
    p_minus = prob.p.p_minus
    out: list[str] = []
    if isinstance(prob, ReactionPQ):
        if not prob.q.p_plus < p_minus:
            out.append("q_+ < p_- violated")
        if not p_minus < prob.s.p_minus:
            out.append("p_- < s_- violated")
        if prob.q.p_minus < 1.0:
            out.append("q_- >= 1 violated")
        if np.any(prob.h.values <= 0.0):
            out.append("h > 0 violated")
        if np.any(prob.l.values <= 0.0):
            out.append("l > 0 violated")
    elif isinstance(prob, FdeStep):
        if not 1.0 < prob.q <= p_minus:
            out.append(f"q in (1, p_-] violated: q={prob.q}, p_-={p_minus}")
        if prob.lam <= 0.0:
            out.append("lambda > 0 violated")
        if np.any(prob.h0.values < 0.0):
            out.append("h0 >= 0 violated")
        out.extend(source_violations(prob.f, prob.q, waive_f2=True))
    elif isinstance(prob, EpsPerturbed):
        if prob.eps <= 0.0:
            out.append("eps > 0 violated")
        if not 1.0 <= prob.m <= p_minus:
            out.append(f"m in [1, p_-] violated: m={prob.m}, p_-={p_minus}")
        out.extend(g_violations(prob.g, prob.m))
    elif isinstance(prob, Torsion):
        if prob.K <= 0.0:
            out.append("K > 0 violated")
    elif isinstance(prob, BarrierProblem):
        if not 1.0 < prob.q < p_minus:
            out.append(f"q in (1, p_-) violated: q={prob.q}, p_-={p_minus}")
        if np.any(prob.c.values < 0.0):
            out.append("c >= 0 violated")
        if prob.mu < 0.0:
            out.append("mu >= 0 violated")
        if prob.K < 0.0:
            out.append("K >= 0 violated")
        if prob.f is not None:
            out.extend(source_violations(prob.f, prob.q, waive_f2=True))
    return out


def a_priori_bound(prob: EllipticProblem) -> float | None:
    """Sup bound predicted by the theory, when the family has one."""
    if isinstance(prob, ReactionPQ):
        ratio = float(np.max(prob.h.values / prob.l.values))
        return max(ratio, 1.0) ** (1.0 / (prob.s.p_minus - prob.q.p_plus))
    return None


def default_initial_guess(grid: Grid, amplitude: float = 0.5) -> GridFunction:
    """A positive bump, since u = 0 is stationary for the sublinear families."""
    x = (grid.nodes - grid.a) / (grid.b - grid.a)
    values = amplitude * np.sin(np.pi * x)
    values[0] = values[-1] = 0.0
    return GridFunction(grid, values, True)
