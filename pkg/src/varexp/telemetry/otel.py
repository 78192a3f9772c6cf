"""OpenTelemetry spans around solves and FDE runs.

Install with the telemetry extra (pip install varexp-pde[telemetry]). Without
it every helper here is a no-op and ``solver_span`` yields None.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from typing import Any

from varexp.models import SolveReport

try:
    from opentelemetry import trace
    from opentelemetry.trace import StatusCode

    HAS_OTEL = True
except ImportError:
    HAS_OTEL = False

TRACER_NAME = "varexp"
ATTR_PREFIX = "varexp."

SpanAttribute = bool | int | float | str


def _set_attributes(span: Any, attributes: Mapping[str, SpanAttribute]) -> None:
    for key, value in attributes.items():
        span.set_attribute(ATTR_PREFIX + key, value)


@contextmanager
def solver_span(
    operation: str,
    attributes: Mapping[str, SpanAttribute] | None = None,
) -> Iterator[Any]:
    """Span named ``varexp.<operation>``; exceptions mark it as an error."""
    if not HAS_OTEL:
        yield None
        return

    tracer = trace.get_tracer(TRACER_NAME)
    with tracer.start_as_current_span(ATTR_PREFIX + operation) as span:
        _set_attributes(span, attributes or {})
        try:
            yield span
        except Exception as e:
            span.set_status(StatusCode.ERROR, str(e))
            span.record_exception(e)
            raise


def record_solve(span: Any, report: SolveReport) -> None:
    """Attach the convergence data of ``report``; a stalled solve gets an error status."""
    if not HAS_OTEL or span is None:
        return
    _set_attributes(
        span,
        {
            "converged": report.converged,
            "iterations": report.iterations,
            "residual_sup": report.residual_sup,
            "tol": report.tol,
            "final_energy": report.final_energy,
        },
    )
    if not report.converged:
        span.set_status(StatusCode.ERROR, report.message)
