"""varexp-pde CLI."""

from __future__ import annotations

import sys
from collections.abc import Generator
from contextlib import contextmanager
from functools import partial
from pathlib import Path
from typing import NoReturn

import click

from varexp.config import (
    DEFAULT_YAML,
    DiazSaaConfig,
    KernelConfig,
    NormsConfig,
    PiconeConfig,
    RunConfig,
    build_elliptic_problem,
    build_exponent,
    build_fde_config,
    build_grid,
    build_initial_guess,
    build_kernel,
    config_digest,
    load_config,
    random_positive_inits,
)
from varexp.errors import (
    BracketError,
    ConfigError,
    ExpressionError,
    GridError,
    HypothesisError,
    PreconditionError,
    SolverError,
)
from varexp.expr import parse
from varexp.grid import GridFunction

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SOLVER_FAILED = 2
EXIT_CONFIG_ERROR = 3

_output_dir_option = click.option(
    "--output-dir", "-o", default=None, help="Artifact directory (default: settings.output_dir)"
)
_json_option = click.option("--json-output", "-j", is_flag=True, help="Also print the report JSON")


@click.group()
@click.version_option(package_name="varexp-pde")
def cli() -> None:
    """varexp-pde: numerics and inequality checks for the p(x)-Laplacian."""
    pass


@cli.command()
@click.option("--output", "-o", default="varexp.yaml", help="Output file path")
@click.option("--force", "-f", is_flag=True, help="Overwrite existing file")
def init(output: str, force: bool) -> None:
    """Initialize a new varexp.yaml configuration file."""
    path = Path(output)
    if path.exists() and not force:
        click.echo(f"Error: {path} already exists. Use --force to overwrite.", err=True)
        sys.exit(1)

    path.write_text(DEFAULT_YAML)
    click.echo(f"Created {path}")
    click.echo("Edit this file to set the domain, exponent and problem sections.")


@cli.command()
@click.argument("config_path")
def validate(config_path: str) -> None:
    """Validate a varexp.yaml configuration file."""
    cfg = _load(config_path, configure_logging=False)
    click.echo(click.style("Config is valid!", fg="green"))
    d = cfg.domain
    click.echo(f"  Domain: [{d.a}, {d.b}] with {d.n_cells} cells")
    p = build_exponent(cfg)
    click.echo(f"  Exponent: p(x) = {cfg.exponent}  (p_- = {p.p_minus:.6g}, p_+ = {p.p_plus:.6g})")
    sections = [
        name
        for name in ("elliptic", "picone", "diaz_saa", "norms", "fde", "kernel")
        if getattr(cfg, name) is not None
    ]
    click.echo(f"  Sections: {', '.join(sections) if sections else 'none'}")
    if cfg.elliptic is not None:
        click.echo(f"  Elliptic family: {cfg.elliptic.family.value}")


@cli.command("check-picone")
@click.option("--config", "-c", "config_path", required=True, help="Path to varexp.yaml")
@_output_dir_option
@_json_option
def check_picone(config_path: str, output_dir: str | None, json_output: bool) -> None:
    """Check the generalised Picone inequality cell by cell."""
    from varexp.io import dumps_report, write_cell_table, write_report
    from varexp.picone import picone_gap

    cfg = _load(config_path)
    pc = cfg.picone or PiconeConfig()
    out = _output_dir(cfg, output_dir)
    with _handle_errors():
        grid = build_grid(cfg)
        k = build_kernel(cfg, pc.kernel, pc.A, pc.dA)
        report = picone_gap(
            k, _zero_trace(pc.v, cfg), _zero_trace(pc.v0, cfg), pc.r, pc.floor, pc.tol, pc.c_h
        )
    artifacts = [
        write_report(report, out / "picone_report.json"),
        write_cell_table(
            grid,
            {"lhs": report.lhs, "rhs": report.rhs, "gap": report.gaps},
            out / "picone_gaps.csv",
        ),
    ]
    passed = report.h_scaled_verdict
    click.echo(f"Picone ({k.name}, r={pc.r}): {_status(passed)}")
    click.echo(f"  min gap: {report.min_gap:.6e}  violating cells: {len(report.violating_cells)}")
    if json_output:
        click.echo(dumps_report(report), nl=False)
    _finish(out, "check-picone", config_digest(config_path), artifacts, passed)


@cli.command("check-diaz-saa")
@click.option("--config", "-c", "config_path", required=True, help="Path to varexp.yaml")
@_output_dir_option
@_json_option
def check_diaz_saa(config_path: str, output_dir: str | None, json_output: bool) -> None:
    """Check the sign of the Diaz-Saa integral for one admissible pair."""
    from varexp.io import dumps_report, write_report
    from varexp.picone import diaz_saa_check

    cfg = _load(config_path)
    dc = cfg.diaz_saa or DiazSaaConfig()
    out = _output_dir(cfg, output_dir)
    with _handle_errors():
        k = build_kernel(cfg, dc.kernel, dc.A, dc.dA)
        report = diaz_saa_check(
            k, _zero_trace(dc.w1, cfg), _zero_trace(dc.w2, cfg), dc.r, dc.floor, dc.tol
        )
    artifacts = [write_report(report, out / "diaz_saa_report.json")]
    click.echo(f"Diaz-Saa ({k.name}, r={dc.r}): {_status(report.holds)}")
    click.echo(f"  integral: {report.integral:.6e}  scale: {report.scale:.6e}")
    if json_output:
        click.echo(dumps_report(report), nl=False)
    _finish(out, "check-diaz-saa", config_digest(config_path), artifacts, report.holds)


@cli.command("check-norms")
@click.option("--config", "-c", "config_path", required=True, help="Path to varexp.yaml")
@_output_dir_option
@_json_option
def check_norms(config_path: str, output_dir: str | None, json_output: bool) -> None:
    """Luxemburg norm, modular chains, Hoelder and co-vanishing for one function."""
    from varexp.grid import CellField
    from varexp.io import dumps_report, write_report
    from varexp.vxspace import (
        check_norm_modular_bounds,
        co_vanishing_check,
        holder_check,
        sobolev_norm,
    )

    cfg = _load(config_path)
    nc = cfg.norms or NormsConfig()
    out = _output_dir(cfg, output_dir)
    with _handle_errors():
        grid = build_grid(cfg)
        p = build_exponent(cfg, grid)
        u_expr = parse(nc.u, ("x",))
        u_cells = CellField.from_expression(u_expr, grid)
        g_cells = CellField.from_expression(parse(nc.g, ("x",)), grid)
        chain = check_norm_modular_bounds(u_cells, p)
        holder = holder_check(u_cells, g_cells, p)
        vanishing = co_vanishing_check(u_cells, p, nc.co_vanishing_steps)
        w1p = sobolev_norm(GridFunction.from_expression(u_expr, grid, False), p)
    result = {
        "norm_modular": chain,
        "holder": holder,
        "co_vanishing": vanishing,
        "sobolev_norm": w1p,
    }
    artifacts = [write_report(result, out / "norms_report.json")]
    passed = chain.holds and holder.holds and vanishing.monotone
    click.echo(f"Norms: {_status(passed)}")
    click.echo(f"  ||u|| = {chain.norm:.12g}  rho(u) = {chain.modular:.12g}  ({chain.branch})")
    click.echo(f"  Hoelder: {holder.lhs:.6e} <= {holder.rhs:.6e}")
    click.echo(f"  W^1,p norm: {w1p:.12g}")
    if json_output:
        click.echo(dumps_report(result), nl=False)
    _finish(out, "check-norms", config_digest(config_path), artifacts, passed)


@cli.command("solve-elliptic")
@click.option("--config", "-c", "config_path", required=True, help="Path to varexp.yaml")
@_output_dir_option
def solve_elliptic(config_path: str, output_dir: str | None) -> None:
    """Minimise the energy of the configured elliptic problem."""
    from varexp.elliptic import default_initial_guess, minimize, uniqueness_probe
    from varexp.grid import write_csv
    from varexp.io import write_report
    from varexp.models import Family, Verdict

    cfg = _load(config_path)
    out = _output_dir(cfg, output_dir)
    with _handle_errors():
        prob = build_elliptic_problem(cfg)
        u_init = build_initial_guess(cfg, prob.grid) or default_initial_guess(prob.grid)
        report = minimize(prob, u_init, cfg.solver, label="solve-elliptic")
    artifacts = [
        write_csv(report.solution, out / "solution.csv"),
        write_report(report, out / "solve_report.json"),
    ]
    click.echo(f"Solve ({report.family.value}): {report.message}")
    click.echo(
        f"  iterations: {report.iterations}  energy: {report.final_energy:.12g}"
        f"  residual: {report.residual_sup:.3e} (tol {report.tol:.1e})"
    )
    if not report.converged:
        _finish(out, "solve-elliptic", config_digest(config_path), artifacts, EXIT_SOLVER_FAILED)

    passed = report.linf_bound_ok
    if report.family in (Family.REACTION_PQ, Family.TORSION):
        passed = passed and report.positivity and report.hopf_ok
        click.echo(f"  positivity: {report.positivity}  Hopf: {report.hopf_ok}")
    if report.linf_bound is not None:
        click.echo(f"  sup bound {report.linf_bound:.6g}: {report.linf_bound_ok}")

    n_inits = cfg.elliptic.uniqueness_inits if cfg.elliptic is not None else 0
    if n_inits > 0:
        with _handle_errors():
            inits = [u_init, *random_positive_inits(prob.grid, n_inits, cfg.settings.seed)]
            uniq = uniqueness_probe(prob, inits, cfg.solver)
        artifacts.append(write_report(uniq, out / "uniqueness_report.json"))
        click.echo(f"  uniqueness: {uniq.verdict.value} (max distance {uniq.max_distance:.3e})")
        passed = passed and uniq.verdict is not Verdict.FAILS
    _finish(out, "solve-elliptic", config_digest(config_path), artifacts, passed)


@cli.command("solve-fde")
@click.option("--config", "-c", "config_path", required=True, help="Path to varexp.yaml")
@_output_dir_option
def solve_fde(config_path: str, output_dir: str | None) -> None:
    """Run the implicit Euler scheme and verify the trajectory."""
    from varexp.fde import energy_estimate, interpolant_distance, run_fde
    from varexp.io import write_manifest, write_report, write_trajectory

    cfg = _load(config_path)
    out = _output_dir(cfg, output_dir)
    digest = config_digest(config_path)
    with _handle_errors():
        fcfg = build_fde_config(cfg)
    try:
        traj = run_fde(fcfg)
    except SolverError as e:
        if e.partial is not None:
            write_manifest(out, "solve-fde", digest, write_trajectory(e.partial, out))
        _fail(EXIT_SOLVER_FAILED, f"Solver failure: {e}")
    except BracketError as e:
        _fail(EXIT_SOLVER_FAILED, f"Solver failure: {e}")
    except HypothesisError as e:
        _fail(EXIT_CONFIG_ERROR, f"Error: {e}")

    artifacts = write_trajectory(traj, out)
    checks = [traj.jensen] if traj.jensen is not None else []
    if cfg.fde is None or cfg.fde.energy_estimate:
        checks.append(energy_estimate(traj))
    checks.append(interpolant_distance(traj))
    artifacts.append(write_report(checks, out / "verification.json"))

    bracketed = all(traj.bracket_ok)
    passed = bracketed and all(c.holds for c in checks)
    click.echo(f"FDE: {fcfg.n_steps} steps of dt={fcfg.dt:.6g}, q={fcfg.q}: {_status(passed)}")
    click.echo(f"  barriers: mu={traj.sub.parameter:.6g}  K={traj.sup.parameter:.6g}")
    click.echo(f"  bracketed at every step: {bracketed}")
    for c in checks:
        click.echo(f"  {c.name}: {c.holds}")
    _finish(out, "solve-fde", digest, artifacts, passed)


@cli.command("verify-contraction")
@click.option("--config-a", "config_a", required=True, help="Config of the first trajectory")
@click.option("--config-b", "config_b", required=True, help="Config of the second trajectory")
@_output_dir_option
def verify_contraction(config_a: str, config_b: str, output_dir: str | None) -> None:
    """Run two Euler trajectories and check contraction and comparison."""
    from varexp.fde import comparison_check, contraction_check, run_fde
    from varexp.io import write_report, write_trajectory
    from varexp.models import Verdict
    from varexp.pipeline import run_independent_sync

    cfg_a = _load(config_a)
    cfg_b = _load(config_b, configure_logging=False)
    out = _output_dir(cfg_a, output_dir)
    with _handle_errors():
        jobs = [partial(run_fde, build_fde_config(c)) for c in (cfg_a, cfg_b)]
        traj_a, traj_b = run_independent_sync(jobs, max_workers=2)
        contraction = contraction_check(traj_a, traj_b)
        comparison = comparison_check(traj_a, traj_b)
    artifacts = [
        *write_trajectory(traj_a, out, prefix="a_"),
        *write_trajectory(traj_b, out, prefix="b_"),
        write_report([contraction, comparison], out / "contraction_report.json"),
    ]
    passed = contraction.holds and comparison.verdict is not Verdict.FAILS
    click.echo(f"Contraction: {_status(contraction.holds)}")
    click.echo(f"  max violation: {contraction.max_violation:.3e} (scale {contraction.scale:.3e})")
    click.echo(f"Comparison: {comparison.verdict.value}  max excess: {comparison.max_excess:.3e}")
    digests = [config_digest(config_a), config_digest(config_b)]
    _finish(out, "verify-contraction", digests, artifacts, passed)


@cli.command("probe-kernel")
@click.option("--config", "-c", "config_path", required=True, help="Path to varexp.yaml")
@click.option("--name", "-n", default=None, help="Kernel name, overriding kernel.name")
@_output_dir_option
@_json_option
def probe_kernel(
    config_path: str, name: str | None, output_dir: str | None, json_output: bool
) -> None:
    """Sample the structural properties of an operator kernel."""
    from varexp.io import dumps_report, write_report
    from varexp.kernels.probes import nr_homogeneity_probe, run_all_probes

    cfg = _load(config_path)
    kc = cfg.kernel or KernelConfig()
    out = _output_dir(cfg, output_dir)
    seed = cfg.settings.seed
    with _handle_errors():
        try:
            k = build_kernel(cfg, name or kc.name, kc.A, kc.dA)
        except KeyError as e:
            _fail(EXIT_CONFIG_ERROR, f"Error: {e.args[0]}")
        reports = run_all_probes(k, kc.samples, seed)
        if kc.r is not None:
            reports.append(nr_homogeneity_probe(k, kc.r, kc.samples, seed))
    artifacts = [write_report(reports, out / "probe_report.json")]
    passed = all(r.passed for r in reports)
    click.echo(f"Kernel '{k.name}': {_status(passed)}")
    for r in reports:
        click.echo(f"  {r.name:<20} {_status(r.passed)}  max error {r.max_error:.3e}")
    if json_output:
        click.echo(dumps_report(reports), nl=False)
    _finish(out, "probe-kernel", config_digest(config_path), artifacts, passed)


@cli.group()
def kernels() -> None:
    """Manage operator kernels."""
    pass


@kernels.command(name="list")
def list_kernels() -> None:
    """List all registered kernels."""
    from varexp.kernels import available_kernels

    click.echo("\nKernels:")
    click.echo("-" * 50)
    for kname, cls in sorted(available_kernels().items()):
        grad = "analytic" if cls.analytic_gradient else "numeric"
        click.echo(f"  {kname:<25} gradient: {grad}")
    click.echo()


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _fail(code: int, message: str) -> NoReturn:
    click.echo(click.style(message, fg="red"), err=True)
    sys.exit(code)


def _load(config_path: str, configure_logging: bool = True) -> RunConfig:
    try:
        cfg = load_config(config_path)
    except FileNotFoundError:
        _fail(EXIT_CONFIG_ERROR, f"Error: File not found: {config_path}")
    except ConfigError as e:
        click.echo(click.style(f"Error: invalid configuration {config_path}", fg="red"), err=True)
        for violation in e.violations:
            click.echo(f"  - {violation}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    if configure_logging:
        from varexp.telemetry.logger import setup_logging
        from varexp.telemetry.otel import HAS_OTEL

        setup_logging(cfg.settings.log_level, cfg.settings.structured_logs)
        if cfg.settings.telemetry and not HAS_OTEL:
            click.echo(
                click.style("Telemetry requested but OpenTelemetry is not installed", fg="yellow"),
                err=True,
            )
    return cfg


def _output_dir(cfg: RunConfig, override: str | None) -> Path:
    return Path(override or cfg.settings.output_dir)


def _zero_trace(text: str, cfg: RunConfig) -> GridFunction:
    return GridFunction.from_expression(parse(text, ("x",)), build_grid(cfg), True)


@contextmanager
def _handle_errors() -> Generator[None, None, None]:
    """Map library errors onto exit codes: 2 for solver failures, 3 for bad input."""
    try:
        yield
    except (SolverError, BracketError) as e:
        _fail(EXIT_SOLVER_FAILED, f"Solver failure: {e}")
    except (
        ConfigError,
        HypothesisError,
        PreconditionError,
        ExpressionError,
        GridError,
    ) as e:
        _fail(EXIT_CONFIG_ERROR, f"Error: {e}")


def _status(passed: bool) -> str:
    return click.style("PASSED", fg="green") if passed else click.style("FAILED", fg="red")


def _finish(
    out: Path,
    command: str,
    config_sha256: str | list[str],
    artifacts: list[Path],
    outcome: bool | int,
) -> NoReturn:
    """Write the manifest, then exit 0/1 on a verdict or with an explicit code."""
    from varexp.io import write_manifest

    manifest = write_manifest(out, command, config_sha256, artifacts)
    click.echo(f"  artifacts: {out} ({len(artifacts)} files, {manifest.name})")
    if isinstance(outcome, bool):
        sys.exit(EXIT_OK if outcome else EXIT_CHECK_FAILED)
    sys.exit(outcome)


if __name__ == "__main__":
    cli()
