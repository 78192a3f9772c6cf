"""Kernels defined by expression text, for probing user-supplied operators."""

from __future__ import annotations

from typing import Any

import numpy as np
import numpy.typing as npt

from varexp.expr import Expression, parse
from varexp.kernels.base import FloatArray, OperatorKernel
from varexp.vxspace import ExponentField

KERNEL_VARIABLES = ("x", "xi", "p")


class ExpressionKernel(OperatorKernel):
    """A(x, xi) from text in the variables x, xi and p (the exponent at x).

    Without ``dA`` the xi-derivative is a central difference with step
    1e-6 * (1 + |xi|), and ``analytic_gradient`` is False.
    """

    name = "expression"

    def __init__(
        self,
        exponent: ExponentField,
        A: str | Expression = "abs(xi)^p",
        dA: str | Expression | None = None,
        **kwargs: Any,
    ) -> None:
        super().__init__(exponent, **kwargs)
        self.A = A if isinstance(A, Expression) else parse(A, KERNEL_VARIABLES)
        if dA is None:
            self.dA: Expression | None = None
        else:
            self.dA = dA if isinstance(dA, Expression) else parse(dA, KERNEL_VARIABLES)
        self.analytic_gradient = self.dA is not None

    def _eval(self, expr: Expression, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
        xs, zs = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
        value = expr.evaluate({"x": xs, "xi": zs, "p": self.p_at(xs)})
        return np.broadcast_to(np.asarray(value, dtype=float), xs.shape).copy()

    def evaluate(self, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
        return self._eval(self.A, x, xi)

    def gradient(self, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
        if self.dA is not None:
            return self._eval(self.dA, x, xi)
        z = np.asarray(xi, dtype=float)
        step = 1e-6 * (1.0 + np.abs(z))
        return (self.evaluate(x, z + step) - self.evaluate(x, z - step)) / (2.0 * step)
