"""Sampling probes for the structural hypotheses of a kernel."""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt

from varexp.kernels.base import OperatorKernel, eval_Nr
from varexp.models import ProbeReport

logger = logging.getLogger("varexp")

HOMOGENEITY_TOL = 1e-9
CONVEXITY_TOL = 1e-9
GRADIENT_TOL = 1e-5
EULER_TOL = 1e-10
ORIGIN_EXCLUSION = 1e-4
XI_RANGE = 4.0


def _sample_x(k: OperatorKernel, rng: np.random.Generator, n: int) -> npt.NDArray[np.float64]:
    grid = k.exponent.grid
    return rng.uniform(grid.a, grid.b, n)


def _report(
    name: str,
    k: OperatorKernel,
    samples: int,
    errors: npt.NDArray[np.float64],
    tolerance: float,
    **details: float,
) -> ProbeReport:
    max_error = float(np.max(errors)) if errors.size else 0.0
    report = ProbeReport(
        name=name,
        kernel=k.name,
        samples=samples,
        max_error=max_error,
        tolerance=tolerance,
        passed=bool(max_error <= tolerance),
        details=details,
    )
    logger.debug("probe %s on %s: max_error=%.3e", name, k.name, max_error)
    return report


def homogeneity_probe(k: OperatorKernel, samples: int = 1000, seed: int = 0) -> ProbeReport:
    """max |A(x, t xi) - t^p A(x, xi)| / (1 + |A(x, t xi)|) over t in [0, 4]; t = 0 included."""
    rng = np.random.default_rng(seed)
    x = _sample_x(k, rng, samples)
    xi = rng.uniform(-XI_RANGE, XI_RANGE, samples)
    t = rng.uniform(0.0, 4.0, samples)
    t[0] = 0.0
    p = k.p_at(x)
    scaled = k.evaluate(x, t * xi)
    errors = np.abs(scaled - t**p * k.evaluate(x, xi)) / (1.0 + np.abs(scaled))
    origin = float(np.max(np.abs(k.evaluate(x, np.zeros_like(xi)))))
    errors = np.append(errors, origin)
    return _report("homogeneity", k, samples, errors, HOMOGENEITY_TOL, value_at_origin=origin)


def convexity_probe(k: OperatorKernel, samples: int = 1000, seed: int = 0) -> ProbeReport:
    """Midpoint-type convexity A(theta xi1 + (1-theta) xi2) <= theta A(xi1) + (1-theta) A(xi2).

    ``strict_gap_min`` is the smallest gap among pairs of opposite sign (the
    only pairs off a common ray in one dimension).
    """
    rng = np.random.default_rng(seed)
    x = _sample_x(k, rng, samples)
    xi1 = rng.uniform(-XI_RANGE, XI_RANGE, samples)
    xi2 = rng.uniform(-XI_RANGE, XI_RANGE, samples)
    theta = rng.uniform(0.0, 1.0, samples)
    # fixed witnesses: an opposite-sign pair and a pair through the origin
    xi1[:2] = (1.0, 0.0)
    xi2[:2] = (-1.0, XI_RANGE)
    theta[:2] = 0.5
    chord = theta * k.evaluate(x, xi1) + (1.0 - theta) * k.evaluate(x, xi2)
    mid = k.evaluate(x, theta * xi1 + (1.0 - theta) * xi2)
    gaps = chord - mid
    errors = np.maximum(-gaps, 0.0) / (1.0 + np.abs(chord))
    off_ray = xi1 * xi2 < 0.0
    strict = float(np.min(gaps[off_ray])) if np.any(off_ray) else float("nan")
    return _report("convexity", k, samples, errors, CONVEXITY_TOL, strict_gap_min=strict)


def symmetry_probe(k: OperatorKernel, samples: int = 1000, seed: int = 0) -> ProbeReport:
    rng = np.random.default_rng(seed)
    x = _sample_x(k, rng, samples)
    xi = rng.uniform(-XI_RANGE, XI_RANGE, samples)
    plus = k.evaluate(x, xi)
    errors = np.abs(plus - k.evaluate(x, -xi)) / (1.0 + np.abs(plus))
    return _report("symmetry", k, samples, errors, HOMOGENEITY_TOL)


def euler_identity_probe(k: OperatorKernel, samples: int = 1000, seed: int = 0) -> ProbeReport:
    """a(x, xi) * xi = A(x, xi) for p(x)-homogeneous kernels."""
    rng = np.random.default_rng(seed)
    x = _sample_x(k, rng, samples)
    xi = rng.uniform(-XI_RANGE, XI_RANGE, samples)
    A = k.evaluate(x, xi)
    errors = np.abs(k.flux(x, xi) * xi - A) / (1.0 + np.abs(A))
    tol = EULER_TOL if k.analytic_gradient else GRADIENT_TOL
    return _report("euler_identity", k, samples, errors, tol)


def grad_consistency(k: OperatorKernel, samples: int = 1000, seed: int = 0) -> ProbeReport:
    """Central differences of A against the supplied gradient, away from xi = 0.

    The error is |fd - grad| / max(1, |grad|).
    """
    rng = np.random.default_rng(seed)
    x = _sample_x(k, rng, samples)
    xi = rng.uniform(-XI_RANGE, XI_RANGE, samples)
    xi = np.where(np.abs(xi) < ORIGIN_EXCLUSION, ORIGIN_EXCLUSION, xi)
    step = 1e-6 * (1.0 + np.abs(xi))
    fd = (k.evaluate(x, xi + step) - k.evaluate(x, xi - step)) / (2.0 * step)
    grad = k.gradient(x, xi)
    errors = np.abs(fd - grad) / np.maximum(1.0, np.abs(grad))
    return _report("grad_consistency", k, samples, errors, GRADIENT_TOL)


def nr_homogeneity_probe(
    k: OperatorKernel, r: float, samples: int = 1000, seed: int = 0
) -> ProbeReport:
    """N_r(x, t xi) = t^r N_r(x, xi)."""
    rng = np.random.default_rng(seed)
    x = _sample_x(k, rng, samples)
    xi = rng.uniform(-XI_RANGE, XI_RANGE, samples)
    t = rng.uniform(0.0, 4.0, samples)
    scaled = eval_Nr(k, x, t * xi, r)
    errors = np.abs(scaled - t**r * eval_Nr(k, x, xi, r)) / (1.0 + np.abs(scaled))
    return _report("nr_homogeneity", k, samples, errors, HOMOGENEITY_TOL, r=r)


def lambda_probe(k: OperatorKernel, samples: int = 1000, seed: int = 0) -> ProbeReport:
    """Empirical Lambda: max |d a / d xi| / |xi|^{p(x)-2} over the samples.

    Reported, never judged; ``passed`` only says the estimate is finite.
    """
    rng = np.random.default_rng(seed)
    x = _sample_x(k, rng, samples)
    xi = rng.uniform(-XI_RANGE, XI_RANGE, samples)
    xi = np.where(np.abs(xi) < ORIGIN_EXCLUSION, ORIGIN_EXCLUSION, xi)
    step = 1e-6 * (1.0 + np.abs(xi))
    da = (k.flux(x, xi + step) - k.flux(x, xi - step)) / (2.0 * step)
    ratio = np.abs(da) / np.abs(xi) ** (k.p_at(x) - 2.0)
    estimate = float(np.max(ratio))
    finite = bool(np.isfinite(estimate))
    return ProbeReport(
        name="lambda",
        kernel=k.name,
        samples=samples,
        max_error=0.0,
        tolerance=0.0,
        passed=finite,
        details={"lambda": estimate},
    )


def run_all_probes(k: OperatorKernel, samples: int = 1000, seed: int = 0) -> list[ProbeReport]:
    return [
        homogeneity_probe(k, samples, seed),
        convexity_probe(k, samples, seed),
        symmetry_probe(k, samples, seed),
        euler_identity_probe(k, samples, seed),
        grad_consistency(k, samples, seed),
        lambda_probe(k, samples, seed),
    ]
