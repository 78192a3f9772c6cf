from __future__ import annotations

import json
from pathlib import Path

from click.testing import CliRunner

from varexp.cli.main import cli
from varexp.config import config_digest

SMALL = """\
settings:
  log_level: error
  output_dir: out
domain:
  n_cells: 32
exponent: "2 + 0.5*x"
solver:
  tol: 1.0e-12
elliptic:
  family: torsion
  K: 1.0
picone:
  v: "x*(1-x)"
  v0: "sin(pi*x)"
  r: 1.5
diaz_saa:
  w1: "x*(1-x)"
  w2: "sin(pi*x)"
  r: 1.5
norms:
  u: "3*sin(pi*x)"
  g: "1 + x"
fde:
  T: 0.2
  n_steps: 4
  q: 1.5
  h: "1 + t*x"
  v0: "sin(pi*x)"
  source: {kind: power, c: "1", gamma: 1.25}
kernel:
  name: plap
  samples: 200
  r: 1.5
"""


def _config(text: str = SMALL, name: str = "run.yaml") -> str:
    Path(name).write_text(text)
    return name


def _manifest(out: str = "out") -> dict:
    return json.loads((Path(out) / "manifest.json").read_text())


def test_cli_init_and_validate() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        init_result = runner.invoke(cli, ["init"])
        assert init_result.exit_code == 0
        validate_result = runner.invoke(cli, ["validate", "varexp.yaml"])
        assert validate_result.exit_code == 0
        assert "Config is valid!" in validate_result.output
        assert "p_- = 2" in validate_result.output
        assert "Elliptic family: torsion" in validate_result.output

        again = runner.invoke(cli, ["init"])
        assert again.exit_code == 1
        assert runner.invoke(cli, ["init", "--force"]).exit_code == 0


def test_validate_reports_every_violation() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        path = _config('exponent: "2"\nelliptic:\n  family: reaction_pq\n  q: "2"\n')
        result = runner.invoke(cli, ["validate", path])
        assert result.exit_code == 3
        assert "q_+ < p_- violated" in result.output

        missing = runner.invoke(cli, ["validate", "nope.yaml"])
        assert missing.exit_code == 3
        assert "File not found" in missing.output


def test_check_picone_writes_report_and_manifest() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        path = _config()
        result = runner.invoke(cli, ["check-picone", "-c", path])
        assert result.exit_code == 0, result.output
        assert "PASSED" in result.output
        report = json.loads(Path("out/picone_report.json").read_text())
        assert report["h_scaled_verdict"] is True
        header = Path("out/picone_gaps.csv").read_text().splitlines()[0]
        assert header == "x,lhs,rhs,gap"
        manifest = _manifest()
        assert manifest["command"] == "check-picone"
        assert manifest["config_sha256"] == config_digest(path)
        assert manifest["artifacts"] == sorted(manifest["artifacts"])
        assert "picone_report.json" in manifest["artifacts"]


def test_reports_are_deterministic() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        path = _config()
        assert runner.invoke(cli, ["check-picone", "-c", path, "-o", "first"]).exit_code == 0
        assert runner.invoke(cli, ["check-picone", "-c", path, "-o", "second"]).exit_code == 0
        for name in ("picone_report.json", "picone_gaps.csv"):
            assert (Path("first") / name).read_bytes() == (Path("second") / name).read_bytes()
        text = Path("first/picone_report.json").read_text()
        assert text.endswith("}\n")
        assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"


def test_check_picone_json_output() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        result = runner.invoke(cli, ["check-picone", "-c", _config(), "--json-output"])
        assert result.exit_code == 0
        assert '"min_gap"' in result.output


def test_check_diaz_saa() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        result = runner.invoke(cli, ["check-diaz-saa", "-c", _config()])
        assert result.exit_code == 0, result.output
        report = json.loads(Path("out/diaz_saa_report.json").read_text())
        assert report["holds"] is True
        assert report["integral"] >= 0.0


def test_check_norms() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        result = runner.invoke(cli, ["check-norms", "-c", _config()])
        assert result.exit_code == 0, result.output
        report = json.loads(Path("out/norms_report.json").read_text())
        assert set(report) == {"norm_modular", "holder", "co_vanishing", "sobolev_norm"}
        assert report["norm_modular"]["branch"] == "norm>=1"


def test_solve_elliptic_torsion() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        result = runner.invoke(cli, ["solve-elliptic", "-c", _config()])
        assert result.exit_code == 0, result.output
        assert Path("out/solution.csv").read_text().startswith("x,value")
        report = json.loads(Path("out/solve_report.json").read_text())
        assert report["converged"] is True
        assert report["family"] == "torsion"
        assert "solution" not in report


def test_solve_elliptic_with_uniqueness_inits() -> None:
    text = SMALL.replace(
        "  family: torsion\n  K: 1.0\n",
        '  family: reaction_pq\n  q: "1.5"\n  s: "3"\n  uniqueness_inits: 2\n',
    )
    runner = CliRunner()
    with runner.isolated_filesystem():
        result = runner.invoke(cli, ["solve-elliptic", "-c", _config(text)])
        assert result.exit_code == 0, result.output
        uniq = json.loads(Path("out/uniqueness_report.json").read_text())
        assert uniq["verdict"] == "holds"
        assert len(uniq["distances"]) == 3


def test_solve_elliptic_non_convergence_exits_2() -> None:
    text = SMALL.replace('"2 + 0.5*x"', '"3"').replace("tol: 1.0e-12", "max_iter: 1")
    runner = CliRunner()
    with runner.isolated_filesystem():
        result = runner.invoke(cli, ["solve-elliptic", "-c", _config(text)])
        assert result.exit_code == 2
        assert Path("out/solve_report.json").exists()
        assert _manifest()["command"] == "solve-elliptic"


def test_solve_fde() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        result = runner.invoke(cli, ["solve-fde", "-c", _config()])
        assert result.exit_code == 0, result.output
        for n in range(5):
            assert Path(f"out/step_{n:04d}.csv").exists()
        assert Path("out/subsolution.csv").exists()
        assert Path("out/supersolution.csv").exists()
        summary = json.loads(Path("out/trajectory.json").read_text())
        assert summary["n_steps"] == 4
        assert all(summary["bracket_ok"])
        checks = json.loads(Path("out/verification.json").read_text())
        assert [c["name"] for c in checks] == ["jensen", "energy_estimate", "interpolant_distance"]
        assert all(c["holds"] for c in checks)


def test_solve_fde_rejects_supercritical_q() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        path = _config(SMALL.replace("q: 1.5", "q: 1.8"))
        result = runner.invoke(cli, ["solve-fde", "-c", path])
        assert result.exit_code == 3
        assert "q <= min" in result.output


def test_verify_contraction() -> None:
    other = SMALL.replace('h: "1 + t*x"', 'h: "1.5"').replace(
        'v0: "sin(pi*x)"\n  source', 'v0: "0.5*sin(pi*x)"\n  source'
    )
    runner = CliRunner()
    with runner.isolated_filesystem():
        a, b = _config(name="a.yaml"), _config(other, name="b.yaml")
        result = runner.invoke(cli, ["verify-contraction", "--config-a", a, "--config-b", b])
        assert result.exit_code == 0, result.output
        assert Path("out/a_step_0000.csv").exists()
        assert Path("out/b_trajectory.json").exists()
        contraction, comparison = json.loads(Path("out/contraction_report.json").read_text())
        assert contraction["holds"] is True
        assert comparison["verdict"] == "inconclusive"
        assert _manifest()["config_sha256"] == [config_digest(a), config_digest(b)]


def test_kernel_command_writes_reports() -> None:
    runner = CliRunner()
    with runner.isolated_filesystem():
        path = _config()
        result = runner.invoke(cli, ["probe-kernel", "-c", path])
        assert result.exit_code == 0, result.output
        reports = json.loads(Path("out/probe_report.json").read_text())
        assert reports[-1]["name"] == "nr_homogeneity"
        assert all(r["passed"] for r in reports)

        unknown = runner.invoke(cli, ["probe-kernel", "-c", path, "--name", "nope"])
        assert unknown.exit_code == 3
        assert "unknown kernel" in unknown.output


def test_kernels_list() -> None:
    runner = CliRunner()
    result = runner.invoke(cli, ["kernels", "list"])
    assert result.exit_code == 0
    assert "plap" in result.output
    assert "expression" in result.output
