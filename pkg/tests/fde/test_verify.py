from __future__ import annotations

from collections.abc import Callable

import numpy as np
import pytest

from varexp.errors import PreconditionError
from varexp.fde import (
    FdeConfig,
    FdeTrajectory,
    comparison_check,
    contraction_check,
    energy_estimate,
    interpolant_distance,
    run_fde,
)
from varexp.models import Verdict

MakeConfig = Callable[..., FdeConfig]


def test_contraction_between_two_runs(make_config: MakeConfig) -> None:
    a = run_fde(make_config(h="1 + t*x", v0="sin(pi*x)"))
    b = run_fde(make_config(h="1.5 - x/2", v0="0.5*sin(pi*x) + x*(1-x)"))
    for first, second in ((a, b), (b, a)):
        report = contraction_check(first, second)
        assert report.holds, report.max_violation
        assert len(report.lhs) == len(report.rhs) == 5
        assert np.all(np.diff(report.rhs) >= 0.0)


def test_contraction_of_a_run_with_itself(make_config: MakeConfig) -> None:
    a = run_fde(make_config())
    report = contraction_check(a, a)
    assert report.max_violation == 0.0
    assert report.lhs == [0.0] * 5


def test_comparison_with_ordered_data(make_config: MakeConfig) -> None:
    low = run_fde(make_config(h="1", v0="0.5*sin(pi*x)"))
    high = run_fde(make_config(h="1.5", v0="sin(pi*x)"))
    report = comparison_check(low, high)
    assert report.preconditions_ok
    assert report.verdict is Verdict.HOLDS
    assert report.holds
    assert report.max_excess <= 0.0


def test_comparison_without_ordered_forcing_is_inconclusive(make_config: MakeConfig) -> None:
    low = run_fde(make_config(h="1.5", v0="0.5*sin(pi*x)"))
    high = run_fde(make_config(h="1", v0="sin(pi*x)"))
    report = comparison_check(low, high)
    assert not report.preconditions_ok
    assert report.verdict is Verdict.INCONCLUSIVE


def test_incompatible_runs_are_rejected(make_config: MakeConfig) -> None:
    a = run_fde(make_config())
    with pytest.raises(PreconditionError):
        contraction_check(a, run_fde(make_config(q=1.4)))
    with pytest.raises(PreconditionError):
        comparison_check(a, run_fde(make_config(n_steps=2)))


def test_energy_estimate(make_config: MakeConfig) -> None:
    traj = run_fde(make_config(h="1 + sin(4*t)*x", n_steps=6))
    report = energy_estimate(traj)
    assert report.holds
    assert len(report.lhs) == len(report.rhs) == len(report.increment_sum) == 6
    assert np.all(np.diff(report.increment_sum) >= 0.0)
    assert np.all(np.diff(report.rhs) >= 0.0)


def test_interpolant_distance(make_config: MakeConfig) -> None:
    traj = run_fde(make_config())
    report = interpolant_distance(traj)
    assert report.holds
    assert 0.0 < report.sup_distance <= report.bound


def _random_run_pair(
    make_config: MakeConfig, seed: int, ordered: bool
) -> tuple[FdeTrajectory, FdeTrajectory]:
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(0.5, 1.5), rng.uniform(0.0, 1.0)
    c, d = rng.uniform(0.2, 1.0), rng.uniform(0.0, 1.0)
    if ordered:
        gap, lift = rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)
        second = (a + gap, b, c + lift, d)
    else:
        second = (
            rng.uniform(0.5, 1.5),
            rng.uniform(0.0, 1.0),
            rng.uniform(0.2, 1.0),
            rng.uniform(0.0, 1.0),
        )
    runs = []
    for ha, hb, va, vb in ((a, b, c, d), second):
        cfg = make_config(
            h=f"{ha} + {hb}*t*x",
            v0=f"{va}*sin(pi*x) + {vb}*x*(1-x)",
            quadrature="lumped",
        )
        runs.append(run_fde(cfg))
    return runs[0], runs[1]


@pytest.mark.parametrize("seed", range(10))
def test_contraction_for_seeded_pairs(make_config: MakeConfig, seed: int) -> None:
    first, second = _random_run_pair(make_config, seed, ordered=False)
    for one, other in ((first, second), (second, first)):
        report = contraction_check(one, other)
        assert report.holds, (seed, report.max_violation)


@pytest.mark.parametrize("seed", range(10))
def test_comparison_for_seeded_ordered_pairs(make_config: MakeConfig, seed: int) -> None:
    low, high = _random_run_pair(make_config, 100 + seed, ordered=True)
    report = comparison_check(low, high)
    assert report.preconditions_ok
    assert report.verdict is Verdict.HOLDS, (seed, report.max_excess)
