from __future__ import annotations

from collections.abc import Callable
from typing import Any

import pytest

from varexp.elliptic import SourceF
from varexp.expr import parse
from varexp.fde import FdeConfig
from varexp.grid import GridFunction, build_uniform
from varexp.models import SolverOptions
from varexp.vxspace import ExponentField

MakeConfig = Callable[..., FdeConfig]


@pytest.fixture
def make_config() -> MakeConfig:
    """Small Euler runs: 32 cells, p = 2 + x/4, q = 1.5, f = s^(1/4)."""

    def _make(
        h: str = "1 + t*x",
        v0: str = "sin(pi*x)",
        T: float = 0.2,
        n_steps: int = 4,
        q: float = 1.5,
        **overrides: Any,
    ) -> FdeConfig:
        grid = build_uniform(0.0, 1.0, 32)
        fields: dict[str, Any] = {
            "T": T,
            "n_steps": n_steps,
            "q": q,
            "p": ExponentField.from_expression(parse("2 + 0.25*x"), grid),
            "f": SourceF.power(1.0, 1.25),
            "h": parse(h),
            "v0": GridFunction.from_expression(parse(v0), grid),
            "solver": SolverOptions(tol=1e-12),
        }
        fields.update(overrides)
        return FdeConfig(**fields)

    return _make
