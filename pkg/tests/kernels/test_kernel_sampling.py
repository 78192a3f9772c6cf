from __future__ import annotations

import numpy as np
import pytest

from varexp.errors import PreconditionError
from varexp.expr import parse
from varexp.grid import build_uniform
from varexp.kernels import (
    ExpressionKernel,
    OperatorKernel,
    PLaplacianKernel,
    available_kernels,
    eval_Nr,
    get_kernel,
    register_kernel,
)
from varexp.kernels.probes import (
    convexity_probe,
    euler_identity_probe,
    grad_consistency,
    homogeneity_probe,
    lambda_probe,
    nr_homogeneity_probe,
    run_all_probes,
    symmetry_probe,
)
from varexp.vxspace import ExponentField


def _exponent(text: str = "2 + 0.5*x") -> ExponentField:
    return ExponentField.from_expression(parse(text, ("x",)), build_uniform(0.0, 1.0, 64))


def test_plap_passes_every_structure_check() -> None:
    reports = run_all_probes(PLaplacianKernel(_exponent()), samples=2000, seed=1)
    assert [r.name for r in reports] == [
        "homogeneity",
        "convexity",
        "symmetry",
        "euler_identity",
        "grad_consistency",
        "lambda",
    ]
    for report in reports:
        assert report.passed, report
    convexity = reports[1]
    assert convexity.details["strict_gap_min"] > 0.0


def test_expression_kernel_matches_plap() -> None:
    p = _exponent()
    k = get_kernel("expression", p, A="abs(xi)^p")
    x = np.linspace(0.0, 1.0, 7)
    xi = np.linspace(-2.0, 2.0, 7)
    np.testing.assert_allclose(k.evaluate(x, xi), PLaplacianKernel(p).evaluate(x, xi), rtol=1e-14)
    assert not k.analytic_gradient
    for report in run_all_probes(k, samples=500):
        assert report.passed, report


def test_homogeneity_sampling_catches_wrong_degree() -> None:
    k = ExpressionKernel(_exponent(), A="abs(xi)^(p+1)")
    assert not homogeneity_probe(k).passed


def test_symmetry_sampling_catches_one_sided_kernel() -> None:
    k = ExpressionKernel(_exponent(), A="max(xi, 0)^p + 2*max(-xi, 0)^p")
    assert homogeneity_probe(k).passed
    assert not symmetry_probe(k).passed


def test_convexity_sampling_catches_concave_kernel() -> None:
    k = ExpressionKernel(_exponent(), A="-abs(xi)^p")
    assert not convexity_probe(k).passed


def test_gradient_sampling_catches_wrong_derivative() -> None:
    k = ExpressionKernel(_exponent(), A="abs(xi)^p", dA="2*p*abs(xi)^(p-1)")
    assert k.analytic_gradient
    assert not grad_consistency(k).passed
    assert not euler_identity_probe(k).passed


def test_lambda_estimate_for_constant_exponent() -> None:
    k = PLaplacianKernel(_exponent("3"))
    report = lambda_probe(k)
    assert report.details["lambda"] == pytest.approx(2.0, rel=1e-5)


def test_nr_is_r_homogeneous() -> None:
    k = PLaplacianKernel(_exponent())
    assert nr_homogeneity_probe(k, r=1.5).passed
    np.testing.assert_allclose(eval_Nr(k, [0.5], [2.0], 2.0), [4.0])
    with pytest.raises(PreconditionError):
        eval_Nr(k, [0.5], [2.0], 0.5)


def test_registry() -> None:
    class Doubled(PLaplacianKernel):
        name = "doubled_plap"

        def evaluate(self, x, xi):  # type: ignore[no-untyped-def]
            return 2.0 * super().evaluate(x, xi)

        def gradient(self, x, xi):  # type: ignore[no-untyped-def]
            return 2.0 * super().gradient(x, xi)

        def flux(self, x, xi):  # type: ignore[no-untyped-def]
            return 2.0 * super().flux(x, xi)

    register_kernel("doubled_plap", Doubled)
    assert {"plap", "expression", "doubled_plap"} <= set(available_kernels())
    k: OperatorKernel = get_kernel("doubled_plap", _exponent())
    assert run_all_probes(k, samples=200)[0].passed
    with pytest.raises(KeyError):
        get_kernel("nope", _exponent())
