from __future__ import annotations

import json
import logging

import numpy as np
import pytest

from varexp.grid import GridFunction, build_uniform
from varexp.models import Family, SolveReport
from varexp.telemetry.logger import (
    LOGGER_NAME,
    StructuredFormatter,
    log_check,
    log_solve_report,
    setup_logging,
)
from varexp.telemetry.otel import HAS_OTEL, record_solve, solver_span


def _report(converged: bool) -> SolveReport:
    grid = build_uniform(0.0, 1.0, 4)
    return SolveReport(
        family=Family.TORSION,
        solution=GridFunction(grid, np.zeros(grid.n_nodes), True),
        iterations=3,
        final_energy=-0.1,
        residual_sup=1e-3,
        tol=1e-9,
        converged=converged,
        positivity=True,
        hopf_ok=True,
        message="converged" if converged else "max_iter reached",
    )


def test_structured_formatter_emits_json() -> None:
    record = logging.LogRecord(LOGGER_NAME, logging.INFO, "", 0, "hello", (), None)
    record.run_data = {"check": "picone"}  # type: ignore[attr-defined]
    data = json.loads(StructuredFormatter().format(record))
    assert data["message"] == "hello"
    assert data["level"] == "INFO"
    assert data["data"] == {"check": "picone"}


def test_structured_formatter_handles_numpy_payload() -> None:
    record = logging.LogRecord(LOGGER_NAME, logging.INFO, "", 0, "gap", (), None)
    record.run_data = {  # type: ignore[attr-defined]
        "min_gap": np.float64(0.25),
        "cells": np.array([1, 2]),
    }
    data = json.loads(StructuredFormatter().format(record))
    assert data["data"] == {"min_gap": 0.25, "cells": [1, 2]}


def test_check_and_solve_records(caplog: pytest.LogCaptureFixture) -> None:
    setup_logging("debug", structured=True)
    with caplog.at_level(logging.INFO, logger=LOGGER_NAME):
        log_check("diaz_saa", True, {"integral": 0.5})
        log_check("contraction", False)
        log_solve_report("torsion", _report(converged=False))
    messages = [r.getMessage() for r in caplog.records]
    assert "Check diaz_saa: PASSED" in messages
    assert "Check contraction: FAILED" in messages
    assert "Solve torsion: NOT CONVERGED" in messages
    failed = next(r for r in caplog.records if r.getMessage() == "Check contraction: FAILED")
    assert failed.levelno == logging.WARNING
    solve = caplog.records[-1]
    assert solve.run_data["reason"] == "max_iter reached"  # type: ignore[attr-defined]


def test_setup_logging_adds_one_handler() -> None:
    setup_logging("info")
    setup_logging("warning")
    logger = logging.getLogger(LOGGER_NAME)
    assert len(logger.handlers) == 1
    assert logger.level == logging.WARNING


def test_solver_span_without_collector() -> None:
    with solver_span("minimize", {"family": "torsion"}) as span:
        record_solve(span, _report(converged=True))
    if not HAS_OTEL:
        assert span is None
