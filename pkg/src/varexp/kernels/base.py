"""Base classes for operator kernels A(x, xi)."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from varexp.errors import PreconditionError
from varexp.vxspace import ExponentField

FloatArray = npt.NDArray[np.float64]


class OperatorKernel(ABC):
    """An operator A(x, xi), positively p(x)-homogeneous and strictly convex in xi.

    ``evaluate`` and ``gradient`` accept scalars or arrays of equal shape for
    ``x`` and ``xi`` and always return arrays.
    """

    name: str = "base"
    analytic_gradient: bool = True

    def __init__(self, exponent: ExponentField, **kwargs: Any) -> None:
        self.exponent = exponent
        self._kwargs = kwargs

    def p_at(self, x: npt.ArrayLike) -> FloatArray:
        return self.exponent.at(x)

    @abstractmethod
    def evaluate(self, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
        """A(x, xi)."""
        ...

    @abstractmethod
    def gradient(self, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
        """The xi-derivative of A(x, xi)."""
        ...

    def flux(self, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
        """a(x, xi) = gradient / p(x)."""
        return self.gradient(x, xi) / self.p_at(x)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"


@dataclass(frozen=True)
class AnisoKernel:
    """One kernel per coordinate direction, each with its own exponent."""

    components: tuple[OperatorKernel, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise PreconditionError("an anisotropic kernel needs at least one component")

    @property
    def p_minus(self) -> float:
        return min(k.exponent.p_minus for k in self.components)


def eval_A(k: OperatorKernel, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
    return k.evaluate(x, xi)


def eval_a(k: OperatorKernel, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
    return k.flux(x, xi)


def eval_Nr(k: OperatorKernel, x: npt.ArrayLike, xi: npt.ArrayLike, r: float) -> FloatArray:
    """N_r(x, xi) = A(x, xi)^{r/p(x)}, positively r-homogeneous."""
    if r < 1.0:
        raise PreconditionError(f"N_r needs r >= 1, got r={r}")
    return np.asarray(k.evaluate(x, xi) ** (r / k.p_at(x)), dtype=float)
