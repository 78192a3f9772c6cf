"""Operator kernels and their registry."""

from __future__ import annotations

from typing import Any

from varexp.kernels.base import AnisoKernel, OperatorKernel, eval_a, eval_A, eval_Nr
from varexp.kernels.builtin import PLaplacianKernel
from varexp.kernels.expression import ExpressionKernel
from varexp.vxspace import ExponentField

# Kernel registry: name -> class
_KERNELS: dict[str, type[OperatorKernel]] = {}


def register_kernel(name: str, cls: type[OperatorKernel]) -> None:
    _KERNELS[name] = cls


def available_kernels() -> dict[str, type[OperatorKernel]]:
    return dict(_KERNELS)


def get_kernel(name: str, exponent: ExponentField, **options: Any) -> OperatorKernel:
    cls = _KERNELS.get(name)
    if cls is None:
        known = ", ".join(sorted(_KERNELS))
        raise KeyError(f"unknown kernel '{name}' (known: {known})")
    return cls(exponent, **options)


register_kernel("plap", PLaplacianKernel)
register_kernel("expression", ExpressionKernel)

__all__ = [
    "AnisoKernel",
    "ExpressionKernel",
    "OperatorKernel",
    "PLaplacianKernel",
    "available_kernels",
    "eval_A",
    "eval_Nr",
    "eval_a",
    "get_kernel",
    "register_kernel",
]
