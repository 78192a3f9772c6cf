"""Report and option models shared across varexp."""

from __future__ import annotations

from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from varexp.grid import GridFunction


class Family(str, Enum):
    """Elliptic problem families."""

    REACTION_PQ = "reaction_pq"
    FDE_STEP = "fde_step"
    EPS_PERTURBED = "eps_perturbed"
    TORSION = "torsion"
    BARRIER = "barrier"


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


# ---------------------------------------------------------------------------
# Function spaces
# ---------------------------------------------------------------------------


class NormModularReport(BaseModel):
    """Norm-modular chain ||u||^{p_-} <= rho(u) <= ||u||^{p_+} (reversed when ||u|| < 1)."""

    name: str = "norm_modular"
    norm: float
    modular: float
    p_minus: float
    p_plus: float
    branch: Literal["norm>=1", "norm<1"]
    lower: float = Field(description="Lower end of the chain")
    upper: float = Field(description="Upper end of the chain")
    holds: bool


class HolderReport(BaseModel):
    """Generalised Hoelder inequality: integral |fg| <= C ||f||_p ||g||_p'."""

    name: str = "holder"
    lhs: float
    rhs: float
    constant: float = Field(description="C = 1/p_- + 1/p'_-, a declared convention")
    holds: bool


class CoVanishingReport(BaseModel):
    name: str = "co_vanishing"
    norms: list[float]
    modulars: list[float]
    monotone: bool


# ---------------------------------------------------------------------------
# Kernels and inequalities
# ---------------------------------------------------------------------------


class ProbeReport(BaseModel):
    """Outcome of a sampling probe on an operator kernel."""

    name: str = Field(description="Probe name, e.g. 'homogeneity'")
    kernel: str
    samples: int
    max_error: float = Field(description="Largest normalised defect over the samples")
    tolerance: float
    passed: bool
    details: dict[str, float] = Field(default_factory=dict)


class PiconeReport(BaseModel):
    """Per-cell gaps RHS - LHS of a Picone-type inequality."""

    name: str = "picone"
    h: float = Field(description="Cell width of the grid the gaps live on")
    min_gap: float = Field(description="Most negative RHS - LHS over cells")
    violating_cells: list[int] = Field(default_factory=list)
    equality_cells: list[int] = Field(default_factory=list)
    tol: float = Field(description="Relative tolerance applied to each cell")
    c_h: float = Field(default=0.0, description="Refinement constant of the h^2 tolerance")
    lhs: list[float] = Field(default_factory=list)
    rhs: list[float] = Field(default_factory=list)
    gaps: list[float] = Field(default_factory=list)
    raw_verdict: bool = Field(description="No cell below -tol * (1 + |RHS|)")
    h_scaled_verdict: bool = Field(description="No cell below -max(tol * scale, c_h * h^2)")

    @property
    def verified(self) -> bool:
        return not self.violating_cells


class DiazSaaReport(BaseModel):
    name: str = "diaz_saa"
    r: float
    integral: float
    scale: float
    tol: float
    holds: bool


# ---------------------------------------------------------------------------
# Elliptic solves
# ---------------------------------------------------------------------------


class SolverOptions(BaseModel):
    """Options of the preconditioned descent."""

    tol: float | None = Field(
        default=None, gt=0.0, description="Sup-norm residual tolerance; default 1e-10 * n_cells"
    )
    max_iter: int = Field(default=200_000, gt=0)
    step0: float = Field(default=1.0, gt=0.0)
    metric: Literal["curvature", "diagonal"] = "curvature"
    armijo_c: float = Field(default=1e-4, gt=0.0, lt=1.0)
    backtrack: float = Field(default=0.5, gt=0.0, lt=1.0)
    max_backtracks: int = Field(default=60, gt=0)

    def resolved_tol(self, n_cells: int) -> float:
        return self.tol if self.tol is not None else 1e-10 * n_cells


class SolveReport(BaseModel):
    """Result of one energy minimisation."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    family: Family
    solution: GridFunction = Field(exclude=True)
    iterations: int
    final_energy: float
    residual_sup: float
    tol: float
    converged: bool
    positivity: bool = Field(description="u > 0 on interior nodes")
    hopf_ok: bool = Field(description="Both outward-normal slopes strictly negative")
    linf_bound: float | None = Field(default=None, description="A priori sup bound, if any")
    linf_bound_ok: bool = True
    message: str = ""
    energy_history: list[float] = Field(default_factory=list, exclude=True)


class PositivityReport(BaseModel):
    name: str = "positivity_hopf"
    min_interior: float
    positive: bool
    outward_derivatives: tuple[float, float]
    interior_slopes: tuple[float, float]
    hopf_ratio: float
    hopf_ok: bool


class UniquenessReport(BaseModel):
    name: str = "uniqueness"
    distances: list[float]
    max_distance: float
    threshold: float
    converged_all: bool
    verdict: Verdict


class RayConvexityReport(BaseModel):
    """Second differences of an energy along a power ray."""

    name: str = "ray_convexity"
    power: float
    t_values: list[float]
    energies: list[float]
    second_differences: list[float]
    min_second_difference: float
    scale: float
    holds: bool


class EllipticContractionReport(BaseModel):
    """||(v1^q - v2^q)^+||_2 <= ||(h1 - h2)^+||_2 for one elliptic pair."""

    name: str = "elliptic_contraction"
    lhs: float
    rhs: float
    violation: float
    tol: float
    holds: bool


# ---------------------------------------------------------------------------
# Fast diffusion
# ---------------------------------------------------------------------------


class JensenReport(BaseModel):
    """sum dt ||h^n||^2 <= ||h||^2 over the space-time cylinder."""

    name: str = "jensen"
    lhs: float
    rhs: float
    holds: bool


class ContractionReport(BaseModel):
    """Step-time check of the L^2 contraction between two trajectories."""

    name: str = "contraction"
    times: list[float]
    lhs: list[float]
    rhs: list[float]
    max_violation: float
    scale: float
    tol: float
    holds: bool


class ComparisonReport(BaseModel):
    name: str = "comparison"
    preconditions_ok: bool
    max_excess: float = Field(description="max over steps and nodes of v1_n - v2_n")
    verdict: Verdict

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS


class EnergyEstimateReport(BaseModel):
    """Discrete energy estimate of the Euler scheme, checked after every step."""

    name: str = "energy_estimate"
    increment_sum: list[float] = Field(description="sum dt ||(v_n^q - v_{n-1}^q)/dt||^2")
    lhs: list[float]
    rhs: list[float]
    holds: bool


class InterpolantReport(BaseModel):
    """sup_t ||v~(t) - v_step(t)^q||^2 against max_n ||v_n^q - v_{n-1}^q||^2."""

    name: str = "interpolant_distance"
    sup_distance: float
    bound: float
    holds: bool


class SelfConvergenceReport(BaseModel):
    name: str = "self_convergence"
    n_steps: list[int]
    differences: list[float] = Field(description="||v^(k)(T) - v^(k+1)(T)||_2")
    ratios: list[float]


class TrajectorySummary(BaseModel):
    """Machine-readable summary of an Euler trajectory."""

    name: str = "trajectory"
    T: float
    n_steps: int
    dt: float
    q: float
    times: list[float]
    sub_parameter: float
    sup_parameter: float
    bracket_ok: list[bool]
    positive: list[bool]
    converged: list[bool]
    iterations: list[int]
    increments: list[float] = Field(description="||v_n^q - v_{n-1}^q||_2 per step")
    jensen: JensenReport
