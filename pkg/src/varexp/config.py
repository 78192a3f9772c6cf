"""YAML run configuration with Pydantic validation and builders for the numerical objects."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError

from varexp.elliptic.problems import (
    EllipticProblem,
    EpsPerturbed,
    FdeStep,
    ReactionPQ,
    SourceF,
    Torsion,
    check_hypotheses,
)
from varexp.errors import ConfigError, VarexpError
from varexp.expr import parse, sample
from varexp.fde.scheme import BRACKET_TOL, QUAD_POINTS, FdeConfig, validate_fde_config
from varexp.grid import (
    Coefficient,
    Grid,
    GridFunction,
    Quadrature,
    build_uniform,
    coefficient_from_expression,
    sample_points,
)
from varexp.kernels import OperatorKernel, get_kernel
from varexp.models import Family, SolverOptions
from varexp.picone import DEFAULT_FLOOR, DEFAULT_TOL
from varexp.vxspace import ExponentField


class SettingsConfig(BaseModel):
    """Global settings."""

    log_level: str = "info"
    structured_logs: bool = False
    telemetry: bool = False
    output_dir: str = "results"
    seed: int = 0


class DomainConfig(BaseModel):
    a: float = 0.0
    b: float = 1.0
    n_cells: int = Field(default=256, ge=2)
    quadrature: Quadrature = Field(
        default="midpoint",
        description="Potentials at cell centres (midpoint) or at the nodes (lumped)",
    )


class SourceConfig(BaseModel):
    """A source term f(x, s) (or g for the perturbed problem)."""

    kind: Literal["zero", "constant", "power"] = "zero"
    c: str = Field(default="0", description="Coefficient c(x) as an expression in x")
    gamma: float = Field(default=2.0, description="Power of the 'power' kind: c s^(gamma-1)")


class EllipticConfig(BaseModel):
    """Problem solved by `solve-elliptic`."""

    family: Family = Family.TORSION
    K: float = 1.0
    h: str = "1"
    l: str = "1"  # noqa: E741
    q: str = "1.5"
    s: str = "3"
    lam: float = 1.0
    h0: str = "1"
    eps: float = 0.1
    m: float = 2.0
    source: SourceConfig = Field(default_factory=SourceConfig)
    initial_guess: str | None = Field(
        default=None, description="Expression for u_init; a positive bump when unset"
    )
    uniqueness_inits: int = Field(
        default=0, ge=0, description="Extra random positive inits for the uniqueness probe"
    )


class PiconeConfig(BaseModel):
    kernel: str = "plap"
    A: str | None = None
    dA: str | None = None
    v: str = "x*(1-x)"
    v0: str = "sin(pi*x)"
    r: float = 2.0
    floor: float = DEFAULT_FLOOR
    tol: float = DEFAULT_TOL
    c_h: float = 0.0


class DiazSaaConfig(BaseModel):
    kernel: str = "plap"
    A: str | None = None
    dA: str | None = None
    w1: str = "x*(1-x)"
    w2: str = "sin(pi*x)"
    r: float = 2.0
    floor: float = DEFAULT_FLOOR
    tol: float = DEFAULT_TOL


class NormsConfig(BaseModel):
    u: str = "sin(pi*x)"
    g: str = "1 + x"
    co_vanishing_steps: int = Field(default=10, ge=1)


class FdeSection(BaseModel):
    """Fast diffusion run of `solve-fde` and `verify-contraction`."""

    T: float = 1.0
    n_steps: int = Field(default=32, ge=1)
    q: float = 1.5
    h: str = "1"
    h0: str | None = Field(
        default=None, description="Lower bound of h; pointwise minimum of the averages when unset"
    )
    v0: str = "sin(pi*x)"
    source: SourceConfig = Field(default_factory=SourceConfig)
    relaxed_q: bool = False
    waive_f2: bool = False
    bracket_tol: float = BRACKET_TOL
    quad_points: int = Field(default=QUAD_POINTS, ge=1)
    energy_estimate: bool = True


class KernelConfig(BaseModel):
    name: str = "plap"
    A: str | None = None
    dA: str | None = None
    samples: int = Field(default=1000, ge=1)
    r: float | None = Field(default=None, description="Also probe N_r homogeneity when set")


class RunConfig(BaseModel):
    """Full run configuration loaded from YAML."""

    version: str = "1"
    settings: SettingsConfig = Field(default_factory=SettingsConfig)
    domain: DomainConfig = Field(default_factory=DomainConfig)
    exponent: str = "2"
    solver: SolverOptions = Field(default_factory=SolverOptions)
    elliptic: EllipticConfig | None = None
    picone: PiconeConfig | None = None
    diaz_saa: DiazSaaConfig | None = None
    norms: NormsConfig | None = None
    fde: FdeSection | None = None
    kernel: KernelConfig | None = None


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_grid(cfg: RunConfig) -> Grid:
    return build_uniform(cfg.domain.a, cfg.domain.b, cfg.domain.n_cells)


def build_exponent(cfg: RunConfig, grid: Grid | None = None) -> ExponentField:
    grid = grid or build_grid(cfg)
    return ExponentField.from_expression(parse(cfg.exponent, ("x",)), grid)


def _nodal(text: str, grid: Grid, dirichlet_zero: bool = False) -> GridFunction:
    return GridFunction.from_expression(parse(text, ("x",)), grid, dirichlet_zero)


def _coefficient(text: str, grid: Grid, quadrature: Quadrature) -> Coefficient:
    return coefficient_from_expression(parse(text, ("x",)), grid, quadrature)


def _scalar(text: str) -> float:
    """A constant given as expression text; any variable is an error."""
    return float(parse(text, ()).evaluate({}))


def build_source(sc: SourceConfig, grid: Grid, quadrature: Quadrature = "midpoint") -> SourceF:
    """c(x) sampled where ``quadrature`` reads the potentials."""
    if sc.kind == "zero":
        return SourceF.zero()
    c = sample(parse(sc.c, ("x",)), sample_points(grid, quadrature))
    if sc.kind == "constant":
        return SourceF.constant(c)
    return SourceF.power(c, sc.gamma)


def build_elliptic_problem(cfg: RunConfig) -> EllipticProblem:
    ec = cfg.elliptic or EllipticConfig()
    grid = build_grid(cfg)
    p = build_exponent(cfg, grid)
    quad = cfg.domain.quadrature
    if ec.family is Family.TORSION:
        return Torsion(p=p, K=ec.K, quadrature=quad)
    if ec.family is Family.REACTION_PQ:
        return ReactionPQ(
            p=p,
            h=_coefficient(ec.h, grid, quad),
            l=_coefficient(ec.l, grid, quad),
            q=ExponentField.from_expression(parse(ec.q, ("x",)), grid, allow_one=True),
            s=ExponentField.from_expression(parse(ec.s, ("x",)), grid),
            quadrature=quad,
        )
    if ec.family is Family.FDE_STEP:
        return FdeStep(
            p=p,
            lam=ec.lam,
            q=_scalar(ec.q),
            h0=_coefficient(ec.h0, grid, quad),
            f=build_source(ec.source, grid, quad),
            quadrature=quad,
        )
    if ec.family is Family.EPS_PERTURBED:
        g = build_source(ec.source, grid, quad)
        return EpsPerturbed(p=p, eps=ec.eps, m=ec.m, g=g, quadrature=quad)
    raise ConfigError([f"elliptic.family: '{ec.family.value}' cannot be solved directly"])


def build_initial_guess(cfg: RunConfig, grid: Grid) -> GridFunction | None:
    ec = cfg.elliptic
    if ec is None or ec.initial_guess is None:
        return None
    return _nodal(ec.initial_guess, grid, dirichlet_zero=True)


def build_kernel(
    cfg: RunConfig,
    name: str,
    A: str | None = None,
    dA: str | None = None,
) -> OperatorKernel:
    p = build_exponent(cfg)
    options: dict[str, Any] = {}
    if A is not None:
        options["A"] = A
    if dA is not None:
        options["dA"] = dA
    return get_kernel(name, p, **options)


def build_fde_config(cfg: RunConfig) -> FdeConfig:
    fc = cfg.fde or FdeSection()
    grid = build_grid(cfg)
    return FdeConfig(
        T=fc.T,
        n_steps=fc.n_steps,
        q=fc.q,
        p=build_exponent(cfg, grid),
        f=build_source(fc.source, grid, cfg.domain.quadrature),
        h=parse(fc.h, ("x", "t")),
        v0=_nodal(fc.v0, grid, dirichlet_zero=True),
        h0=parse(fc.h0, ("x",)) if fc.h0 is not None else None,
        relaxed_q=fc.relaxed_q,
        waive_f2=fc.waive_f2,
        solver=cfg.solver,
        bracket_tol=fc.bracket_tol,
        quad_points=fc.quad_points,
        quadrature=cfg.domain.quadrature,
    )


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _expressions(cfg: RunConfig) -> list[tuple[str, str | None, tuple[str, ...]]]:
    xs = ("x",)
    out: list[tuple[str, str | None, tuple[str, ...]]] = [("exponent", cfg.exponent, xs)]
    if cfg.elliptic is not None:
        ec = cfg.elliptic
        for key in ("h", "l", "q", "s", "h0", "initial_guess"):
            out.append((f"elliptic.{key}", getattr(ec, key), xs))
        out.append(("elliptic.source.c", ec.source.c, xs))
    for section in ("picone", "diaz_saa"):
        sc = getattr(cfg, section)
        if sc is not None:
            keys = ("v", "v0") if section == "picone" else ("w1", "w2")
            for key in keys:
                out.append((f"{section}.{key}", getattr(sc, key), xs))
    if cfg.norms is not None:
        out.append(("norms.u", cfg.norms.u, xs))
        out.append(("norms.g", cfg.norms.g, xs))
    if cfg.fde is not None:
        fc = cfg.fde
        out.append(("fde.h", fc.h, ("x", "t")))
        out.append(("fde.h0", fc.h0, xs))
        out.append(("fde.v0", fc.v0, xs))
        out.append(("fde.source.c", fc.source.c, xs))
    return out


def validate_run_config(cfg: RunConfig) -> list[str]:
    """Every problem with ``cfg``: unparsable expressions, then violated hypotheses."""
    violations: list[str] = []
    for where, text, variables in _expressions(cfg):
        if text is None:
            continue
        try:
            parse(text, variables)
        except VarexpError as e:
            violations.append(f"{where}: {e}")
    if violations:
        return violations

    try:
        build_exponent(cfg)
    except VarexpError as e:
        return [f"exponent: {e}"]

    if cfg.elliptic is not None:
        try:
            prob = build_elliptic_problem(cfg)
            violations.extend(f"elliptic: {msg}" for msg in check_hypotheses(prob))
            build_initial_guess(cfg, prob.grid)
        except ConfigError as e:
            violations.extend(e.violations)
        except VarexpError as e:
            violations.append(f"elliptic: {e}")
    if cfg.fde is not None:
        try:
            violations.extend(f"fde: {msg}" for msg in validate_fde_config(build_fde_config(cfg)))
        except VarexpError as e:
            violations.append(f"fde: {e}")
    for section in ("picone", "diaz_saa"):
        sc = getattr(cfg, section)
        if sc is not None:
            if not 1.0 <= sc.r <= build_exponent(cfg).p_minus + 1e-12:
                violations.append(f"{section}: r in [1, p_-] violated: r={sc.r}")
            violations.extend(_kernel_violations(cfg, section, sc.kernel, sc.A, sc.dA))
    if cfg.kernel is not None:
        kc = cfg.kernel
        violations.extend(_kernel_violations(cfg, "kernel", kc.name, kc.A, kc.dA))
    return violations


def _kernel_violations(
    cfg: RunConfig, where: str, name: str, A: str | None, dA: str | None
) -> list[str]:
    try:
        build_kernel(cfg, name, A, dA)
    except KeyError as e:
        return [f"{where}: {e.args[0]}"]
    except (VarexpError, TypeError) as e:
        return [f"{where}: {e}"]
    return []


def _format_validation_error(err: ValidationError) -> list[str]:
    return [
        f"{'.'.join(str(part) for part in item['loc'])}: {item['msg']}" for item in err.errors()
    ]


def load_config(path: str | Path) -> RunConfig:
    """Load and fully validate a run configuration from a YAML file.

    Raises FileNotFoundError for a missing file and ConfigError listing every
    violation otherwise.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    try:
        with open(path) as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError([f"{path}: {e}"]) from e

    if raw is None:
        return RunConfig()
    if not isinstance(raw, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])

    try:
        cfg = RunConfig(**raw)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(e)) from e

    violations = validate_run_config(cfg)
    if violations:
        raise ConfigError(violations)
    return cfg


def config_digest(path: str | Path) -> str:
    """SHA-256 of the raw config file, recorded in run manifests."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def random_positive_inits(grid: Grid, count: int, seed: int) -> list[GridFunction]:
    """Positive zero-trace initial guesses: random combinations of sine modes."""
    rng = np.random.default_rng(seed)
    x = (grid.nodes - grid.a) / (grid.b - grid.a)
    inits = []
    for _ in range(count):
        amp = rng.uniform(0.1, 2.0)
        wobble = rng.uniform(-0.3, 0.3, 2)
        values = amp * np.sin(np.pi * x) * (
            1.0 + wobble[0] * np.sin(2 * np.pi * x) + wobble[1] * np.cos(3 * np.pi * x) / 2
        )
        values[0] = values[-1] = 0.0
        inits.append(GridFunction(grid, values, True))
    return inits


DEFAULT_YAML = """\
# varexp-pde run configuration
version: "1"

settings:
  log_level: info
  structured_logs: false
  output_dir: results
  seed: 0

domain:
  a: 0.0
  b: 1.0
  n_cells: 256
  quadrature: midpoint

# p(x) as an expression in x
exponent: "2 + 0.5*x"

solver:
  max_iter: 200000
  step0: 1.0
  metric: curvature

elliptic:
  family: torsion
  K: 1.0

picone:
  kernel: plap
  v: "x*(1-x)"
  v0: "sin(pi*x)"
  r: 2.0

diaz_saa:
  kernel: plap
  w1: "x*(1-x)"
  w2: "sin(pi*x)"
  r: 2.0

norms:
  u: "sin(pi*x)"
  g: "1 + x"

fde:
  T: 1.0
  n_steps: 32
  q: 1.5
  h: "1 + 0.5*sin(t)*x*(1-x)"
  v0: "sin(pi*x)"
  source:
    kind: power
    c: "1"
    gamma: 1.25

kernel:
  name: plap
  samples: 1000
"""
