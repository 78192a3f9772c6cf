"""Built-in kernels."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from varexp.kernels.base import FloatArray, OperatorKernel


class PLaplacianKernel(OperatorKernel):
    """A(x, xi) = |xi|^p(x), the kernel of the p(x)-Laplacian."""

    name = "plap"

    def evaluate(self, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
        p = self.p_at(x)
        return np.asarray(np.abs(np.asarray(xi, dtype=float)) ** p, dtype=float)

    def gradient(self, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
        # |xi|^{p-1} sign(xi) is 0 at xi = 0 since p > 1
        p = self.p_at(x)
        z = np.asarray(xi, dtype=float)
        return np.asarray(p * np.abs(z) ** (p - 1.0) * np.sign(z), dtype=float)

    def flux(self, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
        p = self.p_at(x)
        z = np.asarray(xi, dtype=float)
        return np.asarray(np.abs(z) ** (p - 1.0) * np.sign(z), dtype=float)
