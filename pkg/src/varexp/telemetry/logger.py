"""Structured JSON logging for varexp.

Records go to stderr so that ``--json-output`` keeps stdout machine-readable.
Solve and check helpers attach their payload as ``record.run_data``.
"""

from __future__ import annotations

import json
import logging
import sys
from typing import Any

import numpy as np

from varexp.models import SolveReport

LOGGER_NAME = "varexp"
PLAIN_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


class StructuredFormatter(logging.Formatter):
    """One JSON object per record."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        run_data = getattr(record, "run_data", None)
        if run_data is not None:
            payload["data"] = run_data
        if record.exc_info and record.exc_info[1]:
            payload["error"] = f"{type(record.exc_info[1]).__name__}: {record.exc_info[1]}"
        return json.dumps(payload, default=_jsonable)


def setup_logging(level: str = "info", structured: bool = True) -> None:
    """Configure the ``varexp`` logger; repeated calls reuse its single handler."""
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    if not logger.handlers:
        logger.addHandler(logging.StreamHandler(sys.stderr))
    formatter = StructuredFormatter() if structured else logging.Formatter(PLAIN_FORMAT)
    for handler in logger.handlers:
        handler.setFormatter(formatter)


def _emit(msg: str, passed: bool, run_data: dict[str, Any]) -> None:
    logger = logging.getLogger(LOGGER_NAME)
    level = logging.INFO if passed else logging.WARNING
    if not logger.isEnabledFor(level):
        return
    record = logger.makeRecord(
        name=LOGGER_NAME,
        level=level,
        fn="",
        lno=0,
        msg=msg,
        args=(),
        exc_info=None,
    )
    record.run_data = run_data  # type: ignore[attr-defined]
    logger.handle(record)


def log_solve_report(label: str, report: SolveReport) -> None:
    """Log one elliptic solve with its convergence data."""
    run_data: dict[str, Any] = {
        "label": label,
        "family": report.family.value,
        "converged": report.converged,
        "iterations": report.iterations,
        "final_energy": report.final_energy,
        "residual_sup": report.residual_sup,
        "tol": report.tol,
    }
    if not report.converged:
        run_data["reason"] = report.message
    status = "CONVERGED" if report.converged else "NOT CONVERGED"
    _emit(f"Solve {label}: {status}", report.converged, run_data)


def log_check(name: str, passed: bool, payload: dict[str, Any] | None = None) -> None:
    """Log the verdict of a verification check."""
    run_data = {"check": name, "passed": passed, **(payload or {})}
    _emit(f"Check {name}: {'PASSED' if passed else 'FAILED'}", passed, run_data)
